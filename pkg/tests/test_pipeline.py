"""Study orchestration: config handling, reports, rankings, and exports."""

from __future__ import annotations

import io
import math

import numpy as np
import pytest

from graphgen import from_weights
from risknet.errors import ConfigError, NetworkFormatError, WindowError
from risknet.pipeline import (
    ALL_PERIODS,
    RankingRow,
    StudyConfig,
    SubPeriod,
    analyze_panel,
    config_from_sources,
    load_config_file,
    parse_periods,
    period_slug,
    rank_firms,
    read_networks,
    read_reports,
    report_from_dict,
    report_rows,
    report_to_dict,
    timeseries_rows,
    weight_distribution_stats,
    window_report,
    write_study,
    write_timeseries,
    write_vertex_rows,
)
from risknet.spectral import RobustnessReport
from risknet.synthetic import generate_panel


def small_study(**kwargs):
    defaults = dict(
        n_firms=12,
        start=(2007, 1),
        end=(2007, 6),
        seed=9,
        stress=None,
    )
    defaults.update(kwargs)
    panel = generate_panel(**defaults)
    config = StudyConfig(
        sub_periods=(SubPeriod("H1", (2007, 1), (2007, 6)),)
    )
    return analyze_panel(panel, config), config


def fake_report(window_id, label, firms, werc, survivors=None):
    n = len(firms)
    survivors = survivors or tuple(None for _ in firms)
    return RobustnessReport(
        window_id=window_id,
        label=label,
        firms=tuple(firms),
        analyzed_firms=tuple(firms),
        component_note=None,
        density=1.0,
        kirchhoff=float(n),
        normalized_kirchhoff=float(n) / max(1, n * (n - 1) // 2),
        werc=tuple(werc),
        clustering=tuple(0.5 for _ in firms),
        strength=tuple(1.0 for _ in firms),
        surviving_order=tuple(survivors),
    )


# ---------------------------------------------------------------- config


def test_period_parsing_and_slug():
    periods = parse_periods("Pre=2003-01..2007-12; Crash=2008-01..2009-12")
    assert periods[0] == SubPeriod("Pre", (2003, 1), (2007, 12))
    assert periods[1].label == "Crash"
    assert period_slug("All periods") == "all-periods"
    with pytest.raises(ConfigError, match="month out of range"):
        parse_periods("X=2003-13..2004-01")
    with pytest.raises(ConfigError, match="expected Name"):
        parse_periods("just-a-range")


def test_config_validation():
    with pytest.raises(ConfigError, match="alpha"):
        StudyConfig(alpha=0.7)
    with pytest.raises(ConfigError, match="overlap"):
        StudyConfig(
            sub_periods=(
                SubPeriod("A", (2001, 1), (2003, 6)),
                SubPeriod("B", (2003, 6), (2004, 1)),
            )
        )
    with pytest.raises(ConfigError, match="chronological"):
        StudyConfig(
            sub_periods=(
                SubPeriod("B", (2005, 1), (2005, 12)),
                SubPeriod("A", (2001, 1), (2001, 12)),
            )
        )


def test_config_file_parsing_and_precedence(tmp_path):
    cfg = tmp_path / "study.cfg"
    cfg.write_text(
        "# comment\n"
        "min_obs = 12\n"
        "confidence = 0.90\n"
        "window = calendar_month\n"
    )
    values = load_config_file(cfg)
    config = config_from_sources(values)
    assert config.min_obs == 12
    assert config.alpha == pytest.approx(0.10)
    # CLI-style overrides beat the file
    config = config_from_sources(values, alpha=0.05, min_obs=None)
    assert config.alpha == 0.05
    assert config.min_obs == 12


def test_config_file_rejects_unknown_or_duplicate_keys(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("min_obs=5\nwhatever=1\n")
    with pytest.raises(ConfigError, match="unknown key"):
        load_config_file(bad)
    dup = tmp_path / "dup.cfg"
    dup.write_text("min_obs=5\nmin_obs=6\n")
    with pytest.raises(ConfigError, match="duplicate key"):
        load_config_file(dup)
    noeq = tmp_path / "noeq.cfg"
    noeq.write_text("min_obs 5\n")
    with pytest.raises(ConfigError, match="key=value"):
        load_config_file(noeq)


# ---------------------------------------------------------------- reports


def test_window_report_on_disconnected_network_restricts_and_notes():
    w = np.zeros((5, 5))
    for i, j in ((0, 1), (1, 2), (0, 2)):
        w[i, j] = w[j, i] = 0.6
    w[3, 4] = w[4, 3] = 0.9
    report = window_report(from_weights(w))
    assert report.component_note == "restricted to largest component: 3 of 5 firms"
    assert report.analyzed_firms == ("F00", "F01", "F02")
    assert len(report.werc) == 3
    assert report.firms == tuple(f"F{i:02d}" for i in range(5))


def test_window_report_refuses_tiny_component():
    w = np.zeros((4, 4))
    w[0, 1] = w[1, 0] = 0.5
    w[2, 3] = w[3, 2] = 0.4
    with pytest.raises(WindowError, match="need 3"):
        window_report(from_weights(w))


def test_analyze_panel_produces_one_report_per_healthy_window():
    result, config = small_study()
    assert len(result.reports) == 6
    assert len(result.networks) == 6
    assert result.skipped == ()
    for report in result.reports:
        n = len(report.analyzed_firms)
        assert len(report.werc) == n
        assert len(report.clustering) == n
        assert len(report.strength) == n
        assert 0.0 <= report.density <= 1.0
        assert report.normalized_kirchhoff > 0.0
    labels = [r.label for r in result.reports]
    assert labels == sorted(labels)


def test_report_json_roundtrip_with_infinities():
    report = fake_report(
        7,
        "2008-03",
        ("A", "B", "C"),
        (math.inf, 0.25, -0.1),
        survivors=(2, None, None),
    )
    payload = report_to_dict(report)
    assert payload["vertices"][0]["werc"] == "inf"
    again = report_from_dict(payload)
    assert again == report
    with pytest.raises(NetworkFormatError, match="schema"):
        report_from_dict(dict(payload, schema_version=3))


# ---------------------------------------------------------------- ranking


def test_rank_firms_orders_and_quartiles():
    reports = [
        fake_report(t, f"2001-{t:02d}", ("A", "B", "C", "D"), (0.4, 0.3, 0.2, 0.1))
        for t in range(1, 5)
    ]
    (table,) = [
        t for t in rank_firms(reports, ()) if t.period == ALL_PERIODS
    ]
    assert [r.firm for r in table.rows] == ["A", "B", "C", "D"]
    assert [r.rank for r in table.rows] == [1, 2, 3, 4]
    assert [r.quartile for r in table.rows] == [1, 2, 3, 4]
    assert all(r.coverage == 4 for r in table.rows)


def test_rank_firms_coverage_floor_excludes():
    reports = [
        fake_report(t, f"2001-{t:02d}", ("A", "B"), (0.2, 0.1)) for t in range(1, 9)
    ]
    # C shows up in exactly one of eight windows: below the 25% floor
    reports[0] = fake_report(1, "2001-01", ("A", "B", "C"), (0.2, 0.1, 9.9))
    (table,) = rank_firms(reports, ())
    assert [r.firm for r in table.rows] == ["A", "B"]
    assert table.excluded == (("C", 1),)
    # at exactly 25% (2 of 8) the firm is kept
    reports[1] = fake_report(2, "2001-02", ("A", "B", "C"), (0.2, 0.1, 9.9))
    (table,) = rank_firms(reports, ())
    assert [r.firm for r in table.rows] == ["C", "A", "B"]


def test_rank_firms_infinite_means_rank_first_with_tie_rules():
    firms = ("A", "B", "C", "D")
    reports = [
        fake_report(
            1,
            "2001-01",
            firms,
            (math.inf, math.inf, 5.0, 0.1),
            survivors=(3, 2, None, None),
        ),
        fake_report(
            2,
            "2001-02",
            firms,
            (0.0, math.inf, 4.0, 0.2),
            survivors=(None, 2, None, None),
        ),
    ]
    (table,) = rank_firms(reports, ())
    # B disconnects twice, A once; both beat every finite mean
    assert [r.firm for r in table.rows] == ["B", "A", "C", "D"]
    assert table.rows[0].mean_werc == math.inf
    assert table.rows[1].mean_werc == math.inf
    assert table.rows[2].mean_werc == pytest.approx(4.5)


def test_rank_firms_per_period_membership():
    reports = [
        fake_report(1, "2001-01", ("A", "B", "C"), (0.3, 0.2, 0.1)),
        fake_report(2, "2001-02", ("A", "B", "C"), (0.3, 0.2, 0.1)),
        fake_report(3, "2002-01", ("A", "B", "C"), (0.1, 0.2, 0.3)),
    ]
    periods = (
        SubPeriod("One", (2001, 1), (2001, 12)),
        SubPeriod("Two", (2002, 1), (2002, 12)),
    )
    tables = {t.period: t for t in rank_firms(reports, periods)}
    assert set(tables) == {"One", "Two", ALL_PERIODS}
    assert [r.firm for r in tables["One"].rows] == ["A", "B", "C"]
    assert [r.firm for r in tables["Two"].rows] == ["C", "B", "A"]
    assert tables[ALL_PERIODS].window_count == 3
    # firm absent from a period's windows entirely: excluded from that table
    reports_gap = reports[:2] + [fake_report(3, "2002-01", ("B", "C"), (0.2, 0.3))]
    tables = {t.period: t for t in rank_firms(reports_gap, periods)}
    assert [r.firm for r in tables["Two"].rows] == ["C", "B"]


def test_ranking_relabel_invariance():
    rng = np.random.default_rng(3)
    werc_values = rng.uniform(-0.2, 0.8, size=6)
    firms = tuple(f"F{i}" for i in range(6))
    renamed = tuple(f"Z{5 - i}" for i in range(6))
    base = rank_firms([fake_report(1, "2001-01", firms, tuple(werc_values))], ())
    swapped = rank_firms([fake_report(1, "2001-01", renamed, tuple(werc_values))], ())
    assert [r.rank for r in base[0].rows] == [r.rank for r in swapped[0].rows]
    mapping = dict(zip(firms, renamed))
    assert [mapping[r.firm] for r in base[0].rows] == [r.firm for r in swapped[0].rows]


def test_quartile_chunks_use_ceiling():
    firms = tuple(f"F{i:02d}" for i in range(10))
    werc_values = tuple(float(10 - i) for i in range(10))
    (table,) = rank_firms([fake_report(1, "2001-01", firms, werc_values)], ())
    chunks = [r.quartile for r in table.rows]
    # ceil(10/4)=3 firms per quartile, the leftover lands in the fourth
    assert chunks == [1, 1, 1, 2, 2, 2, 3, 3, 3, 4]


# ------------------------------------------------------- stats and exports


def test_weight_stats_constant_and_singleton():
    w = np.zeros((4, 4))
    iu = np.triu_indices(4, k=1)
    w[iu] = 0.5
    net = from_weights(w + w.T, label="2003-05")
    (band,) = weight_distribution_stats([net])
    assert band.group == "2003"
    assert band.mean == 0.5
    assert band.q05 == 0.5 and band.q95 == 0.5
    assert band.count == 6


def test_weight_stats_uniform_monte_carlo():
    rng = np.random.default_rng(12)
    nets = []
    for i in range(12):
        n = 40
        upper = np.triu(rng.uniform(size=(n, n)), k=1)
        nets.append(from_weights(upper + upper.T, label=f"2004-{i + 1:02d}"))
    (band,) = weight_distribution_stats(nets)
    assert band.mean == pytest.approx(0.5, abs=0.02)
    assert band.q05 == pytest.approx(0.05, abs=0.02)
    assert band.q95 == pytest.approx(0.95, abs=0.02)


def test_weight_stats_empty_group_omitted(caplog):
    empty = from_weights(np.zeros((3, 3)), label="2001-01")
    full = from_weights(
        np.array([[0.0, 0.5, 0.0], [0.5, 0.0, 0.0], [0.0, 0.0, 0.0]]),
        label="2002-01",
    )
    with caplog.at_level("WARNING"):
        bands = weight_distribution_stats([empty, full])
    assert [b.group for b in bands] == ["2002"]
    assert "2001" in caplog.text


def test_timeseries_rows_and_export(tmp_path):
    reports = [
        fake_report(2, "2001-02", ("A", "B", "C"), (0.1, 0.2, 0.3)),
        fake_report(1, "2001-01", ("A", "B", "C"), (0.1, 0.2, 0.3)),
        fake_report(3, "2001-03", ("A", "B", "C"), (0.1, 0.2, 0.3)),
    ]
    periods = (SubPeriod("Early", (2001, 1), (2001, 2)),)
    rows = timeseries_rows(reports, periods)
    assert [row[0] for row in rows] == [1, 2, 3]
    assert [row[5] for row in rows] == ["Early", "Early", ""]
    assert rows[0][2] == 1.0  # density straight from the report
    path = write_timeseries(reports, periods, tmp_path)
    lines = path.read_text().splitlines()
    assert lines[0] == "window,label,density,normalized_kirchhoff,median_clustering,period"
    assert len(lines) == 4
    # empty report list gives a header-only file
    empty = write_timeseries([], periods, tmp_path / "sub")
    assert empty.read_text().splitlines() == [lines[0]]


def test_flat_vertex_rows_serialize_inf():
    report = fake_report(1, "2001-01", ("A", "B"), (math.inf, 0.5), survivors=(1, None))
    rows = report_rows([report])
    assert rows == [(1, "A", math.inf, 0.5, 1.0), (1, "B", 0.5, 0.5, 1.0)]
    buffer = io.StringIO()
    write_vertex_rows([report], buffer)
    lines = buffer.getvalue().splitlines()
    assert lines[0] == "window,firm,werc,clustering,strength"
    assert lines[1].split(",")[2] == "inf"


# ------------------------------------------------------------- file tree


def test_write_study_tree_and_readback(tmp_path):
    result, config = small_study()
    write_study(result, config, tmp_path)
    assert sorted(p.name for p in (tmp_path / "rankings").iterdir()) == [
        "all-periods.csv",
        "h1.csv",
    ]
    assert len(list((tmp_path / "networks").glob("window_*.json"))) == 6
    reports = read_reports(tmp_path)
    assert [r.window_id for r in reports] == [r.window_id for r in result.reports]
    assert reports == result.reports
    networks = read_networks(tmp_path)
    assert [n.label for n in networks] == [n.label for n in result.networks]
    for read, built in zip(networks, result.networks):
        assert np.array_equal(read.weights, built.weights)


def test_locality_of_window_removal():
    panel_full = generate_panel(10, (2007, 1), (2007, 5), seed=4, stress=None)
    config = StudyConfig()
    full = analyze_panel(panel_full, config)
    # drop March from the input
    keep = [i for i, d in enumerate(panel_full.dates) if d.month != 3]
    from risknet.panel import panel_from_rows

    panel_cut = panel_from_rows(
        [panel_full.dates[i] for i in keep],
        panel_full.firms,
        panel_full.returns[keep, :],
        panel_full.mask[keep, :],
    )
    cut = analyze_panel(panel_cut, config)
    assert len(cut.reports) == len(full.reports) - 1
    by_label_full = {r.label: r for r in full.reports}
    for report in cut.reports:
        twin = by_label_full[report.label]
        # identical except for the positional window id
        assert report.analyzed_firms == twin.analyzed_firms
        assert report.werc == twin.werc
        assert report.density == twin.density
        assert report.normalized_kirchhoff == twin.normalized_kirchhoff


def test_all_degenerate_study_is_fatal():
    panel = generate_panel(4, (2007, 1), (2007, 2), seed=2, stress=None)
    # no calendar month has 50 trading days, so nothing is eligible
    with pytest.raises(WindowError, match="no analyzable window"):
        analyze_panel(panel, StudyConfig(min_obs=50))

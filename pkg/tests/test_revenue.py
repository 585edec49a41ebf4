import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import published_mismatches
from pollinate.errors import DuplicatePlatform, EmptyDataset, MalformedRow, NonPositiveValue
from pollinate.revenue import (
    RevenueParams,
    UsageRow,
    compute_revenue_table,
    depth_chart_data,
    ingest_usage_csv,
    pollination_uplift,
    revenue_table,
    usage_2023_published,
    usage_2023,
    usage_2023_path,
    table_to_csv,
    table_to_json,
    uplift_dominance_check,
)

HEADER = "platform,time_min_per_day,freq_visits_per_week\n"


@pytest.fixture
def table():
    return revenue_table(usage_2023())


def _by_name(table):
    return {r.platform: r for r in table}


class TestIngest:
    def test_bundled_usage_file(self):
        rows = ingest_usage_csv(usage_2023_path())
        assert len(rows) == 10
        assert rows[0] == UsageRow("FACEBOOK & FB Messenger", 22.6, 4.5)
        assert rows[-1] == UsageRow("LINKEDIN", 0.8, 1.8)

    def test_zero_time(self, tmp_path):
        p = tmp_path / "u.csv"
        p.write_text(HEADER + "A,0,1\n")
        with pytest.raises(NonPositiveValue) as exc:
            ingest_usage_csv(p)
        assert exc.value.line == 2

    def test_duplicate(self, tmp_path):
        p = tmp_path / "u.csv"
        p.write_text(HEADER + "FACEBOOK,1,1\nFACEBOOK,2,2\n")
        with pytest.raises(DuplicatePlatform):
            ingest_usage_csv(p)

    def test_malformed_number(self, tmp_path):
        p = tmp_path / "u.csv"
        p.write_text(HEADER + "A,1,1\nB,x,1\n")
        with pytest.raises(MalformedRow) as exc:
            ingest_usage_csv(p)
        assert exc.value.line == 3

    def test_bad_header(self, tmp_path):
        p = tmp_path / "u.csv"
        p.write_text("name,t,f\nA,1,1\n")
        with pytest.raises(MalformedRow):
            ingest_usage_csv(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            ingest_usage_csv(tmp_path / "nope.csv")


class TestCompute:
    def test_facebook(self, table):
        fb = table[0]
        assert round(fb.ln_time, 2) == 7.21
        assert fb.ln_time == pytest.approx(math.log(1356))
        assert fb.mwri == pytest.approx(7 * 4.5 * 22.6 / 100)
        assert round(fb.mwri, 2) == 7.12  # published 7.11 from unrounded inputs
        assert fb.mwri == pytest.approx(7.11, rel=0.05)

    def test_youtube_cwri(self, table):
        assert _by_name(table)["YOUTUBE"].cwri == pytest.approx(18.34, rel=0.05)

    def test_single_row(self):
        (row,) = compute_revenue_table([UsageRow("A", 1.0, 2.0)])
        assert row.pct_mt == 1.0
        assert row.ln_time == pytest.approx(4.094, abs=5e-4)

    def test_empty(self):
        with pytest.raises(EmptyDataset):
            compute_revenue_table([])

    def test_uplift_spot_values(self, table):
        t = _by_name(table)
        assert t["FACEBOOK & FB Messenger"].d_cwri == pytest.approx(1.699, rel=0.05)
        assert t["YOUTUBE"].d_mwri == pytest.approx(3.102, rel=0.05)

    def test_uplift_zero_share(self):
        row = compute_revenue_table([UsageRow("A", 1.0, 1.0)])[0]
        from dataclasses import replace
        (out,) = pollination_uplift([replace(row, pct_mt=0.0)])
        assert out.d_cwri == 0.0 and out.d_mwri == 0.0

    def test_golden_published_table(self, table):
        assert published_mismatches(table, usage_2023_published()) == []

    def test_order_preserved(self, table):
        assert [r.platform for r in table] == [r.platform for r in usage_2023()]


class TestDepthChart:
    def test_bundled_dataset(self, table):
        chart = depth_chart_data(table)
        assert chart[0][0] == "WHATSAPP"
        assert chart[0][1] == pytest.approx(40.25, rel=0.05)
        assert chart[-1][0] == "LINKEDIN"
        assert chart[-1][1] == pytest.approx(6.90, rel=0.05)
        depths = [d for _, d in chart]
        assert depths == sorted(depths, reverse=True)

    def test_single(self):
        assert len(depth_chart_data(revenue_table([UsageRow("A", 3, 3)]))) == 1


class TestDominance:
    def test_bundled_dataset(self, table):
        rep = uplift_dominance_check(table)
        assert rep.agrees and rep.inversions == ()
        assert rep.uplift_order == ("YOUTUBE", "TIKTOK", "FACEBOOK & FB Messenger", "WHATSAPP",
                                    "INSTAGRAM", "X (TWITTER)", "TELEGRAM", "SNAPCHAT",
                                    "PINTEREST", "LINKEDIN")

    def test_published_columns_agree(self):
        pub = usage_2023_published()
        by_d = [r["platform"] for r in sorted(pub, key=lambda r: -r["d_cwri"])]
        by_s = [r["platform"] for r in sorted(pub, key=lambda r: -r["pct_mt"])]
        assert by_d == by_s

    def test_depth_breaks_share_tie(self):
        # equal time: share ties, uplift follows depth; input order puts the shallow one first
        table = revenue_table([UsageRow("LOW", 5.0, 1.0), UsageRow("HIGH", 5.0, 10.0)])
        rep = uplift_dominance_check(table)
        assert rep.uplift_order == ("HIGH", "LOW")
        assert rep.share_order == ("LOW", "HIGH")
        assert rep.inversions == (("LOW", "HIGH"),)
        assert not rep.agrees

    def test_single(self):
        assert uplift_dominance_check(revenue_table([UsageRow("A", 1, 1)])).agrees


@given(st.lists(st.tuples(st.floats(0.1, 500), st.floats(0.1, 50)), min_size=1, max_size=20),
       st.floats(0.01, 100))
def test_properties(values, c):
    rows = [UsageRow(f"p{i}", t, f) for i, (t, f) in enumerate(values)]
    base = revenue_table(rows)
    assert math.fsum(r.pct_mt for r in base) == pytest.approx(1.0, abs=1e-9)
    for r in base:
        assert r.d_cwri <= r.cwri and r.d_mwri <= r.mwri
        assert min(r.cwri, r.mwri, r.d_cwri, r.d_mwri) >= 0
    scaled = revenue_table(rows, RevenueParams(cpc=2.0 * c, cpm=7.0 * c))
    for a, b in zip(base, scaled):
        assert b.cwri == pytest.approx(c * a.cwri, rel=1e-12)
        assert b.d_cwri == pytest.approx(c * a.d_cwri, rel=1e-12)
        assert b.mwri == pytest.approx(c * a.mwri, rel=1e-12)
        assert b.d_mwri == pytest.approx(c * a.d_mwri, rel=1e-12)


def test_outputs(table):
    text = table_to_csv(table)
    lines = text.splitlines()
    assert lines[0] == "platform,time,ln_time,pct_mt,freq,depth,cwri,mwri,d_cwri,d_mwri"
    assert lines[1].split(",")[-4:] == ["10.493", "7.119", "1.696", "1.151"]
    payload = json.loads(table_to_json(table, RevenueParams()))
    assert payload["schema_version"] == 1
    assert payload["uplift_dominance"]["agrees"] is True
    assert payload["depth_chart"][0]["platform"] == "WHATSAPP"


def test_params_must_be_positive():
    with pytest.raises(ValueError):
        RevenueParams(cpc=0.0)

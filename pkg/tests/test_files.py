import logging

import numpy as np
import pytest

from readtrack import files
from readtrack.geometry import EmptyInputError, GazeSample, GroundTruth, LabeledSample, PageGeometry


def write(tmp_path, text, name="fix.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_parse_three_rows(tmp_path):
    p = write(tmp_path, "index,time,fpog_x,fpog_y\n1,0.0,10,20\n2,0.1,11,21\n3,0.2,12,22\n")
    samples = files.parse_fixation_csv(p)
    assert [s.index for s in samples] == [1, 2, 3]
    assert [(s.z_x, s.z_y, s.timestamp) for s in samples][1] == (11.0, 21.0, 0.1)


def test_parse_bad_x_names_row(tmp_path):
    p = write(tmp_path, "index,time,fpog_x,fpog_y\n1,0.0,abc,20\n")
    with pytest.raises(files.CsvFormatError, match="row 2"):
        files.parse_fixation_csv(p)


def test_parse_normalized_mapping(tmp_path):
    p = write(tmp_path, "index,time,fpog_x,fpog_y\n1,0,0.5,0.5\n")
    (s,) = files.parse_fixation_csv(p, PageGeometry(25, 25.0, 600.0), normalized=True)
    assert (s.z_x, s.z_y) == (300.0, 325.0)


def test_parse_without_index_column(tmp_path):
    p = write(tmp_path, "FPOGX,FPOGY\n5,6\n7,8\n")
    samples = files.parse_fixation_csv(p)
    assert [s.index for s in samples] == [1, 2]
    assert samples[1].timestamp is None


def test_parse_empty_file(tmp_path):
    with pytest.raises(EmptyInputError):
        files.parse_fixation_csv(write(tmp_path, ""))
    with pytest.raises(EmptyInputError):
        files.parse_fixation_csv(write(tmp_path, "index,time,fpog_x,fpog_y\n", "h.csv"))


def test_parse_missing_column(tmp_path):
    with pytest.raises(files.CsvFormatError, match="fpog_y"):
        files.parse_fixation_csv(write(tmp_path, "index,fpog_x\n1,2\n"))


def test_parse_short_row(tmp_path):
    with pytest.raises(files.CsvFormatError, match="row 3"):
        files.parse_fixation_csv(write(tmp_path, "index,time,fpog_x,fpog_y\n1,0,1,2\n2,0\n"))


def test_non_monotone_time_only_warns(tmp_path, caplog):
    p = write(tmp_path, "index,time,fpog_x,fpog_y\n1,5,1,1\n2,4,2,2\n")
    with caplog.at_level(logging.WARNING):
        samples = files.parse_fixation_csv(p)
    assert len(samples) == 2
    assert "not monotone" in caplog.text


def test_duplicate_index_rejected(tmp_path):
    with pytest.raises(files.CsvFormatError):
        files.parse_fixation_csv(write(tmp_path, "index,time,fpog_x,fpog_y\n1,0,1,1\n1,0,2,2\n"))


def test_labeled_empty_is_header_only(tmp_path):
    p = tmp_path / "out.csv"
    files.write_labeled_csv([], p)
    assert p.read_bytes() == b"index,z_x,z_y,est_line,x_hat\n"


def test_labeled_single_row(tmp_path):
    p = tmp_path / "out.csv"
    files.write_labeled_csv([(LabeledSample(GazeSample(1, 1.5, 25.0), 1), 1.25)], p)
    assert p.read_text().splitlines() == ["index,z_x,z_y,est_line,x_hat", "1,1.5,25,1,1.25"]


def test_labeled_blank_for_skipped(tmp_path):
    p = tmp_path / "out.csv"
    files.write_labeled_csv([(LabeledSample(GazeSample(1, 1.5, 25.0), 1), None)], p)
    assert p.read_text().splitlines()[1] == "1,1.5,25,1,"
    ((lab, xh),) = files.read_labeled_csv(p)
    assert xh is None and lab.est_line == 1


def test_labeled_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    rows = [
        (LabeledSample(GazeSample(i, float(x), float(y)), int(n)), float(h))
        for i, (x, y, n, h) in enumerate(
            zip(rng.uniform(-50, 650, 200), rng.uniform(0, 650, 200), rng.integers(1, 26, 200), rng.uniform(0, 600, 200)),
            start=1,
        )
    ]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    files.write_labeled_csv(rows, p1)
    back = files.read_labeled_csv(p1)
    for (lab, xh), (lab2, xh2) in zip(rows, back):
        assert lab2.sample.index == lab.sample.index and lab2.est_line == lab.est_line
        # written at 9 significant digits
        for a, b in [(lab.sample.z_x, lab2.sample.z_x), (lab.sample.z_y, lab2.sample.z_y), (xh, xh2)]:
            assert b == pytest.approx(a, rel=5e-9, abs=1e-300)
    # values already at the written precision survive a second trip unchanged
    files.write_labeled_csv(back, p2)
    again = files.read_labeled_csv(p2)
    for (lab, xh), (lab2, xh2) in zip(back, again):
        assert abs(lab2.sample.z_x - lab.sample.z_x) <= 1e-9
        assert abs(lab2.sample.z_y - lab.sample.z_y) <= 1e-9
        assert abs(xh2 - xh) <= 1e-9
    assert p1.read_bytes() == p2.read_bytes()


def test_write_is_deterministic(tmp_path):
    rows = [(LabeledSample(GazeSample(1, 1 / 3, 2 / 3), 1), 0.1)]
    files.write_labeled_csv(rows, tmp_path / "a.csv")
    files.write_labeled_csv(rows, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert b"\r" not in (tmp_path / "a.csv").read_bytes()


def test_truth_round_trip(tmp_path):
    truth = [GroundTruth(1, 0.0, 25.0, 1), GroundTruth(2, 15.384615384615385, 25.0, 1)]
    p = tmp_path / "t.csv"
    files.write_truth_csv(truth, p)
    back = files.read_truth_csv(p)
    assert back[0] == truth[0]
    assert back[1].true_x == pytest.approx(truth[1].true_x, rel=5e-9)


def test_fixation_round_trip(tmp_path):
    samples = [GazeSample(1, 1.0, 2.0), GazeSample(2, 3.0, 4.0, timestamp=0.5)]
    p = tmp_path / "f.csv"
    files.write_fixation_csv(samples, p)
    back = files.parse_fixation_csv(p)
    assert back == samples


@pytest.mark.parametrize(
    "value, text",
    [(None, ""), (float("nan"), ""), (3, "3"), (np.int64(4), "4"), (0.1, "0.1"), (1 / 3, "0.333333333"), (1e-12, "1e-12")],
)
def test_fmt(value, text):
    assert files.fmt(value) == text

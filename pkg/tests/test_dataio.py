"""Ingestion of delimited files, census summaries and the synthetic
generator."""

import numpy as np
import pytest

from simplexclf.dataio import (
    DatasetSchema,
    LabeledCompositionDataset,
    SyntheticSpec,
    generate_synthetic,
    group_summary,
    load_dataset,
    load_glass,
    zero_summary,
)
from simplexclf.errors import (
    AllZeroError,
    InvalidSpecError,
    LengthMismatchError,
    MissingColumnError,
    NegativeComponentError,
    ParseError,
    TooShortError,
)

SCHEMA = DatasetSchema(label_col="label")


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


PERCENT_CSV = """\
sand,silt,clay,label
77.5,19.5,3.0,coast
71.9,24.9,3.2,coast
50.7,36.1,13.2,offshore
52.2,40.9,6.9,offshore
"""


# -- reading ---------------------------------------------------------------------


def test_percentages_are_closed(tmp_path):
    ds = load_dataset(write(tmp_path, PERCENT_CSV), SCHEMA)
    assert ds.n == 4 and ds.D == 3
    assert np.allclose(ds.rows.sum(axis=1), 1.0, atol=1e-15)
    assert np.allclose(ds.rows[0], [0.775, 0.195, 0.030])
    # the pre-closure values survive for export
    assert np.allclose(ds.raw[0], [77.5, 19.5, 3.0])
    assert ds.component_names == ("sand", "silt", "clay")
    assert (ds.labels == ["coast", "coast", "offshore", "offshore"]).all()


def test_tab_delimited(tmp_path):
    text = PERCENT_CSV.replace(",", "\t")
    path = write(tmp_path, text, "data.tsv")
    ds = load_dataset(path, DatasetSchema(label_col="label",
                                          delimiter="\t"))
    assert ds.n == 4 and ds.D == 3


def test_drop_cols_are_excluded(tmp_path):
    text = PERCENT_CSV.replace("sand,", "id,sand,").replace(
        "77.5,", "1,77.5,").replace("71.9,", "2,71.9,").replace(
        "50.7,", "3,50.7,").replace("52.2,", "4,52.2,")
    ds = load_dataset(write(tmp_path, text),
                      DatasetSchema(label_col="label", drop_cols=("id",)))
    assert ds.component_names == ("sand", "silt", "clay")


def test_component_cols_select_and_order(tmp_path):
    ds = load_dataset(
        write(tmp_path, PERCENT_CSV),
        DatasetSchema(label_col="label", component_cols=("clay", "sand")),
    )
    assert ds.component_names == ("clay", "sand")
    assert np.allclose(ds.raw[0], [3.0, 77.5])


def test_blank_lines_are_skipped(tmp_path):
    text = PERCENT_CSV.replace("coast\n71.9", "coast\n\n71.9")
    ds = load_dataset(write(tmp_path, text), SCHEMA)
    assert ds.n == 4


def test_provenance_digest_tracks_content(tmp_path):
    a = load_dataset(write(tmp_path, PERCENT_CSV, "a.csv"), SCHEMA)
    b = load_dataset(write(tmp_path, PERCENT_CSV, "b.csv"), SCHEMA)
    assert a.provenance["digest"] == b.provenance["digest"]
    changed = PERCENT_CSV.replace("77.5", "77.6")
    c = load_dataset(write(tmp_path, changed, "c.csv"), SCHEMA)
    assert c.provenance["digest"] != a.provenance["digest"]


@pytest.mark.parametrize("old, new, error, fragment", [
    ("77.5", "-77.5", NegativeComponentError, "sand"),
    ("77.5,19.5,3.0", "0,0,0", AllZeroError, "line 2"),
    ("19.5", "n/a", ParseError, "n/a"),
    ("71.9,24.9,3.2,coast", "71.9,24.9,coast", ParseError, "line 3"),
    (",coast\n", ",\n", ParseError, "label"),
], ids=["negative", "all-zero", "non-numeric", "ragged", "empty-label"])
def test_bad_cell_reports_location(tmp_path, old, new, error, fragment):
    text = PERCENT_CSV.replace(old, new, 1)
    with pytest.raises(error, match=fragment):
        load_dataset(write(tmp_path, text), SCHEMA)


def test_missing_label_column(tmp_path):
    with pytest.raises(MissingColumnError, match="'group'"):
        load_dataset(write(tmp_path, PERCENT_CSV),
                     DatasetSchema(label_col="group"))


def test_missing_component_column(tmp_path):
    with pytest.raises(MissingColumnError, match="gravel"):
        load_dataset(
            write(tmp_path, PERCENT_CSV),
            DatasetSchema(label_col="label",
                          component_cols=("sand", "gravel")),
        )


def test_duplicate_header(tmp_path):
    text = PERCENT_CSV.replace("silt", "sand", 1)
    with pytest.raises(ParseError, match="duplicate"):
        load_dataset(write(tmp_path, text), SCHEMA)


def test_empty_file(tmp_path):
    with pytest.raises(ParseError, match="empty"):
        load_dataset(write(tmp_path, ""), SCHEMA)


def test_header_only_file(tmp_path):
    with pytest.raises(ParseError, match="no data rows"):
        load_dataset(write(tmp_path, "sand,silt,clay,label\n"), SCHEMA)


def test_too_few_components(tmp_path):
    text = "sand,label\n77.5,coast\n22.5,offshore\n"
    with pytest.raises(TooShortError):
        load_dataset(write(tmp_path, text), SCHEMA)


def test_round_trip_preserves_digest(tmp_path):
    first = load_dataset(write(tmp_path, PERCENT_CSV), SCHEMA)
    out = tmp_path / "echo.csv"
    first.to_csv(out)
    second = load_dataset(out, SCHEMA)
    assert second.content_digest() == first.content_digest()
    assert (second.raw == first.raw).all()
    assert (second.labels == first.labels).all()
    # and the export is stable under a second pass
    out2 = tmp_path / "echo2.csv"
    second.to_csv(out2)
    assert out2.read_text() == out.read_text()


# -- dataset container -------------------------------------------------------------


def toy(raw=None, labels=("a", "a", "b"), names=("u", "v", "w")):
    if raw is None:
        raw = [[0.2, 0.3, 0.5], [0.1, 0.1, 0.8], [0.6, 0.2, 0.2]]
    return LabeledCompositionDataset(raw, labels, names)


def test_rows_are_read_only():
    ds = toy()
    with pytest.raises(ValueError):
        ds.rows[0, 0] = 0.5
    with pytest.raises(ValueError):
        ds.raw[0, 0] = 0.5


def test_group_accessors():
    ds = toy()
    assert ds.group_names == ("a", "b")
    assert ds.g == 2
    assert ds.group_sizes == {"a": 2, "b": 1}
    assert (ds.group_indices("a") == [0, 1]).all()


def test_group_names_are_sorted():
    ds = toy(labels=("z", "m", "a"))
    assert ds.group_names == ("a", "m", "z")


def test_rejects_label_count_mismatch():
    with pytest.raises(LengthMismatchError):
        toy(labels=("a", "b"))


def test_rejects_name_count_mismatch():
    with pytest.raises(LengthMismatchError):
        toy(names=("u", "v"))


def test_rejects_single_group():
    with pytest.raises(InvalidSpecError):
        toy(labels=("a", "a", "a"))


def test_rejects_single_part():
    with pytest.raises(TooShortError):
        LabeledCompositionDataset([[1.0], [1.0]], ["a", "b"], ["u"])


def test_zero_bookkeeping():
    ds = toy(raw=[[0.0, 0.4, 0.6], [0.1, 0.9, 0.0], [0.5, 0.5, 0.0],
                  [0.2, 0.3, 0.5]],
             labels=("a", "a", "b", "b"))
    assert ds.has_zeros
    assert (ds.zero_counts == [1, 1, 1, 0]).all()
    assert (ds.zero_mask[:, 2] == [False, True, True, False]).all()


# -- census summaries ---------------------------------------------------------------


def test_zero_summary_hand_oracle():
    ds = toy(raw=[[0.0, 0.4, 0.6], [0.1, 0.9, 0.0], [0.5, 0.5, 0.0],
                  [0.2, 0.3, 0.5]],
             labels=("a", "a", "b", "b"))
    summary = zero_summary(ds)
    assert summary["n"] == 4
    per_comp = {row["component"]: row for row in summary["per_component"]}
    assert per_comp["u"]["zeros"] == 1 and per_comp["u"]["fraction"] == 0.25
    assert per_comp["v"]["zeros"] == 0
    assert per_comp["w"]["zeros"] == 2 and per_comp["w"]["fraction"] == 0.5
    per_row = {row["zeros"]: row for row in summary["per_row_zero_count"]}
    assert per_row[0]["rows"] == 1 and per_row[1]["rows"] == 3
    # fractions are exact row counts over n
    for row in summary["per_row_zero_count"]:
        assert row["fraction"] * summary["n"] == row["rows"]


def test_group_summary_hand_oracle():
    ds = toy(raw=[[0.0, 0.4, 0.6], [0.1, 0.9, 0.0], [0.5, 0.5, 0.0],
                  [0.2, 0.3, 0.5]],
             labels=("a", "a", "b", "b"))
    assert group_summary(ds) == [
        {"group": "a", "size": 2, "rows_with_zeros": 2},
        {"group": "b", "size": 2, "rows_with_zeros": 1},
    ]


# -- synthetic generator -------------------------------------------------------------


def test_synthetic_is_deterministic():
    spec = SyntheticSpec("lra", 4, 3, 20, 1.5, 42)
    a = generate_synthetic(spec)
    b = generate_synthetic(spec)
    assert (a.raw == b.raw).all()
    assert a.content_digest() == b.content_digest()
    c = generate_synthetic(SyntheticSpec("lra", 4, 3, 20, 1.5, 43))
    assert not (a.raw == c.raw).all()


def test_synthetic_layout():
    ds = generate_synthetic(SyntheticSpec("eda", 5, 3, 12, 2.0, 0))
    assert ds.n == 36 and ds.D == 5
    assert ds.group_names == ("g01", "g02", "g03")
    assert ds.group_sizes == {"g01": 12, "g02": 12, "g03": 12}
    assert ds.component_names == ("c01", "c02", "c03", "c04", "c05")
    assert (ds.rows > 0).all()
    assert ds.provenance["source"] == "synthetic:eda"


def test_synthetic_regimes_differ():
    lra = generate_synthetic(SyntheticSpec("lra", 4, 2, 30, 2.0, 7))
    eda = generate_synthetic(SyntheticSpec("eda", 4, 2, 30, 2.0, 7))
    assert not np.allclose(lra.rows, eda.rows)


def test_eda_first_group_hugs_the_boundary():
    ds = generate_synthetic(SyntheticSpec("eda", 4, 3, 60, 10.0, 5))
    first = ds.rows[ds.group_indices("g01"), 0]
    second = ds.rows[ds.group_indices("g02"), 0]
    third = ds.rows[ds.group_indices("g03"), 0]
    assert 0.01 < first.mean() < 0.07
    assert first.mean() < second.mean() < third.mean()


@pytest.mark.parametrize("spec_args", [
    ("mix", 4, 2, 10, 1.0, 0),
    ("lra", 2, 2, 10, 1.0, 0),
    ("lra", 4, 1, 10, 1.0, 0),
    ("lra", 4, 2, 1, 1.0, 0),
    ("lra", 4, 2, 10, 0.0, 0),
    ("lra", 4, 4, 10, 1.0, 0),
    ("eda", 3, 3, 10, 60.0, 0),
], ids=["regime", "dims", "groups", "size", "separation",
        "lra-groups-exceed-axes", "eda-ladder-overflow"])
def test_synthetic_spec_validation(spec_args):
    with pytest.raises(InvalidSpecError):
        SyntheticSpec(*spec_args)


# -- forensic glass -----------------------------------------------------------------


RAW_GLASS_SAMPLE = """\
1,1.52101,13.64,4.49,1.10,71.78,0.06,8.75,0.00,0.00,1
2,1.51761,13.89,3.60,1.36,72.73,0.48,7.83,0.00,0.00,1
3,1.51618,13.53,3.55,1.54,72.99,0.39,7.78,0.00,0.00,2
4,1.51766,13.21,3.69,1.29,72.61,0.57,8.22,0.00,0.00,2
"""


def test_raw_layout_drops_id_and_index_and_maps_codes(tmp_path):
    path = tmp_path / "glass.data"
    path.write_text(RAW_GLASS_SAMPLE)
    ds = load_glass(path)
    assert ds.n == 4 and ds.D == 8
    assert ds.component_names == ("Na", "Mg", "Al", "Si", "K", "Ca",
                                  "Ba", "Fe")
    assert ds.group_names == ("window float", "window non-float")
    # neither the id nor the refractive index leaks into the parts
    assert np.allclose(ds.raw[0], [13.64, 4.49, 1.10, 71.78, 0.06,
                                   8.75, 0.00, 0.00])


def test_raw_layout_rejects_unknown_code(tmp_path):
    path = tmp_path / "glass.data"
    path.write_text(RAW_GLASS_SAMPLE.replace(",0.00,1\n", ",0.00,4\n", 1))
    with pytest.raises(ParseError, match="type code 4"):
        load_glass(path)


@pytest.mark.needs_glass
def test_glass_dimensions(glass):
    assert glass.n == 214 and glass.D == 8 and glass.g == 6


@pytest.mark.needs_glass
def test_glass_group_sizes(glass):
    assert glass.group_sizes == {
        "window float": 70,
        "window non-float": 76,
        "vehicle window": 17,
        "containers": 13,
        "tableware": 9,
        "headlamps": 29,
    }

import json
import random

import pytest

from textcamp.corpus import (
    Example,
    LabeledDataset,
    infer_format,
    load_dataset,
    summarize,
    write_dataset,
)
from textcamp.errors import DuplicateId, EmptyDataset, MalformedRecord


def test_example_rejects_blank_text():
    with pytest.raises(MalformedRecord):
        Example(id="a", text="   ", label=0)


def test_example_rejects_bad_label():
    with pytest.raises(MalformedRecord):
        Example(id="a", text="hello", label=2)


def test_example_allows_unlabeled():
    ex = Example(id="a", text="hello", label=None)
    assert ex.label is None


def test_dataset_rejects_duplicate_ids():
    rows = (Example(id="a", text="x", label=0), Example(id="a", text="y", label=1))
    with pytest.raises(DuplicateId):
        LabeledDataset(split_name="train", examples=rows)


def test_dataset_rejects_mixed_labeling():
    rows = (Example(id="a", text="x", label=0), Example(id="b", text="y", label=None))
    with pytest.raises(MalformedRecord):
        LabeledDataset(split_name="train", examples=rows)


def test_dataset_rejects_unknown_split():
    with pytest.raises(ValueError):
        LabeledDataset(split_name="dev", examples=(Example(id="a", text="x", label=0),))


def test_summarize_counts():
    rows = tuple(
        Example(id=f"e{i}", text=f"t{i}", label=1 if i < 3 else 0) for i in range(10)
    )
    summary = summarize(LabeledDataset(split_name="train", examples=rows))
    assert summary.total_count == 10
    assert summary.positive_count == 3
    assert summary.negative_count == 7
    assert summary.positive_count + summary.negative_count == summary.total_count


def test_summarize_unlabeled_has_no_class_counts():
    rows = tuple(Example(id=f"e{i}", text=f"t{i}", label=None) for i in range(4))
    summary = summarize(LabeledDataset(split_name="test", examples=rows))
    assert summary.total_count == 4
    assert summary.positive_count is None
    assert summary.negative_count is None


def test_infer_format_by_suffix():
    assert infer_format("a/b/c.tsv") == "tsv"
    assert infer_format("c.csv") == "csv"
    assert infer_format("c.jsonl") == "jsonl"
    with pytest.raises(ValueError):
        infer_format("c.parquet")


@pytest.mark.parametrize("fmt", ["tsv", "csv", "jsonl"])
def test_round_trip_labeled(tmp_path, fmt):
    rows = tuple(
        Example(id=f"e{i}", text=f"some text {i}", label=i % 2) for i in range(20)
    )
    ds = LabeledDataset(split_name="train", examples=rows)
    path = tmp_path / f"data.{fmt}"
    write_dataset(ds, path)
    back = load_dataset(path, split_name="train")
    assert back.examples == ds.examples


@pytest.mark.parametrize("fmt", ["tsv", "csv", "jsonl"])
def test_round_trip_unlabeled(tmp_path, fmt):
    rows = tuple(Example(id=f"e{i}", text=f"some text {i}", label=None) for i in range(5))
    ds = LabeledDataset(split_name="test", examples=rows)
    path = tmp_path / f"data.{fmt}"
    write_dataset(ds, path)
    back = load_dataset(path, split_name="test")
    assert back.examples == ds.examples
    assert not back.labeled


def test_round_trip_random_instances(tmp_path):
    # Lossless across formats for texts drawn from a flat-safe alphabet.
    rng = random.Random(425)
    alphabet = "abc def,ghi'j\"k?!"
    for case in range(100):
        fmt = rng.choice(["tsv", "csv", "jsonl"])
        n = rng.randint(1, 12)
        labeled = rng.random() < 0.8
        rows = []
        for i in range(n):
            text = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 30))).strip()
            if not text:
                text = "x"
            rows.append(
                Example(
                    id=f"r{case}-{i}",
                    text=text,
                    label=rng.randint(0, 1) if labeled else None,
                )
            )
        ds = LabeledDataset(split_name="train", examples=tuple(rows))
        path = tmp_path / f"case{case}.{fmt}"
        write_dataset(ds, path)
        assert load_dataset(path, split_name="train").examples == ds.examples


def test_jsonl_preserves_tabs_and_newlines(tmp_path):
    rows = (Example(id="a", text="line one\nline\ttwo", label=1),)
    ds = LabeledDataset(split_name="train", examples=rows)
    path = tmp_path / "data.jsonl"
    write_dataset(ds, path)
    assert load_dataset(path, split_name="train").examples == ds.examples


def test_tsv_refuses_tab_in_text(tmp_path):
    rows = (Example(id="a", text="has\ttab", label=1),)
    ds = LabeledDataset(split_name="train", examples=rows)
    with pytest.raises(MalformedRecord):
        write_dataset(ds, tmp_path / "data.tsv")


def test_csv_refuses_newline_in_text(tmp_path):
    rows = (Example(id="a", text="has\nnewline", label=1),)
    ds = LabeledDataset(split_name="train", examples=rows)
    with pytest.raises(MalformedRecord):
        write_dataset(ds, tmp_path / "data.csv")


def test_empty_file_raises(tmp_path):
    path = tmp_path / "data.tsv"
    path.write_text("id\ttext\tlabel\n", encoding="utf-8")
    with pytest.raises(EmptyDataset):
        load_dataset(path, split_name="train")


def test_malformed_tsv_row_raises_with_line_number(tmp_path):
    path = tmp_path / "data.tsv"
    path.write_text("id\ttext\tlabel\na\thello\t1\nb\tonly-two-fields\n", encoding="utf-8")
    with pytest.raises(MalformedRecord) as err:
        load_dataset(path, split_name="train")
    assert "3" in str(err.value)


def test_bad_tsv_header_raises(tmp_path):
    path = tmp_path / "data.tsv"
    path.write_text("ident\ttext\tlabel\na\thello\t1\n", encoding="utf-8")
    with pytest.raises(MalformedRecord):
        load_dataset(path, split_name="train")


def test_tsv_duplicate_id_raises(tmp_path):
    path = tmp_path / "data.tsv"
    path.write_text("id\ttext\tlabel\na\thello\t1\na\tworld\t0\n", encoding="utf-8")
    with pytest.raises(DuplicateId):
        load_dataset(path, split_name="train")


def test_jsonl_rejects_boolean_label(tmp_path):
    path = tmp_path / "data.jsonl"
    path.write_text(json.dumps({"id": "a", "text": "x", "label": True}) + "\n", encoding="utf-8")
    with pytest.raises(MalformedRecord):
        load_dataset(path, split_name="train")


def test_jsonl_rejects_out_of_range_label(tmp_path):
    path = tmp_path / "data.jsonl"
    path.write_text(json.dumps({"id": "a", "text": "x", "label": 3}) + "\n", encoding="utf-8")
    with pytest.raises(MalformedRecord):
        load_dataset(path, split_name="train")


def test_tsv_label_must_be_zero_or_one(tmp_path):
    path = tmp_path / "data.tsv"
    path.write_text("id\ttext\tlabel\na\thello\t2\n", encoding="utf-8")
    with pytest.raises(MalformedRecord):
        load_dataset(path, split_name="train")


def test_explicit_format_overrides_suffix(tmp_path):
    path = tmp_path / "data.txt"
    path.write_text("id\ttext\tlabel\na\thello\t1\n", encoding="utf-8")
    ds = load_dataset(path, "tsv", split_name="train")
    assert ds.examples[0].text == "hello"


def test_summarize_total_matches_parsed_rows(tmp_path):
    rng = random.Random(99)
    for n in (1, 5, 37):
        rows = tuple(
            Example(id=f"e{i}", text=f"w{i}", label=rng.randint(0, 1)) for i in range(n)
        )
        ds = LabeledDataset(split_name="validation", examples=rows)
        path = tmp_path / f"n{n}.csv"
        write_dataset(ds, path)
        assert summarize(load_dataset(path, split_name="validation")).total_count == n

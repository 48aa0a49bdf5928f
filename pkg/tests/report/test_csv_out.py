import csv

from walklab.report import write_csv, write_dict_csv


def test_write_csv_counts_rows(tmp_path):
    path = str(tmp_path / "out" / "cycles.csv")

    n = write_csv(path, ("k", "T"), [(1, 5), (2, 7)])

    assert n == 2
    with open(path) as fh:
        assert list(csv.reader(fh)) == [["k", "T"], ["1", "5"], ["2", "7"]]


def test_write_dict_csv_uses_first_row_keys(tmp_path):
    # Arrange
    path = str(tmp_path / "sites.csv")
    rows = [{"site": 0, "state": 1}, {"state": 0, "site": 1}]

    # Act
    n = write_dict_csv(path, rows)

    # Assert
    assert n == 2
    with open(path) as fh:
        assert list(csv.DictReader(fh)) == [{"site": "0", "state": "1"}, {"site": "1", "state": "0"}]


def test_write_dict_csv_skips_empty_rows(tmp_path):
    path = tmp_path / "empty.csv"

    assert write_dict_csv(str(path), []) == 0
    assert not path.exists()

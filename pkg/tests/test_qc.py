from deident.dicom.dataset import DataSet, sequence_element, text_element
from deident.qc import dataset_phrases, format_pool, phrases, qc_string_pool


def test_phrases_split_on_delimiters():
    assert phrases("a^b/c;d,e\\f") == ["a", "b", "c", "d", "e", "f"]


def test_pool_counts_sum_to_occurrences():
    ds = DataSet([text_element((0x0008, 0x0080), "LO", "Mercy^Mercy"),
                  text_element((0x0008, 0x0018), "UI", "1.2.3"),
                  sequence_element((0x0040, 0xA730), [DataSet([text_element((0x0008, 0x0104), "LO", "Mercy")])])])
    pool = qc_string_pool([ds, ds])
    assert dict((p, c) for c, p in pool) == {"Mercy": 6}
    assert sum(dataset_phrases(ds).values()) == 3
    assert format_pool(pool).splitlines()[-1] == "6\tMercy"

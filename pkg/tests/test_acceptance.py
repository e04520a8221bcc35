import pytest

from acceptance import CRITERIA, line

RESULTS = {}


@pytest.mark.parametrize("number,title,fn", CRITERIA, ids=[f"criterion_{c[0]:02d}" for c in CRITERIA])
def test_criterion(number, title, fn):
    ok, detail = fn()
    text = line(number, title, ok, detail)
    RESULTS[number] = text
    print(text)
    assert ok, text

from collections import Counter

import pytest

from pagetrim.metrics import (
    ReportCard,
    diff,
    media_urls,
    resource_metrics,
    structural_similarity,
    visible_text_tokens,
)
from pagetrim.model import ResourceRecord, Snapshot


def record(url, media="text/javascript", length=10):
    return ResourceRecord(
        url=url,
        status=200,
        media_type=media,
        headers=(),
        body_path="x",
        body_length=length,
    )


def make_snapshot(js_count=4, js_size=100, other_count=2, other_size=50):
    resources = {}
    index = record("https://s.test/index.html", "text/html", 500)
    resources[index.url] = index
    for i in range(js_count):
        r = record(f"https://s.test/js/{i}.js", "text/javascript", js_size)
        resources[r.url] = r
    for i in range(other_count):
        r = record(f"https://s.test/img/{i}.png", "image/png", other_size)
        resources[r.url] = r
    return Snapshot("snap-m", index.url, resources)


def test_nothing_blocked_full_totals():
    snap = make_snapshot()
    card = resource_metrics(snap, index_bytes=b"<script>a()</script>")
    assert card.request_count == 7
    assert card.total_bytes == 500 + 4 * 100 + 2 * 50
    assert card.js_request_count == 4
    assert card.js_bytes == 400
    assert card.script_tag_count == 1


def test_blocking_js_reduces_only_js():
    snap = make_snapshot()
    blocked = frozenset(
        u for u in snap.resources if u.endswith(".js") and "/js/0" not in u
    )
    card = resource_metrics(snap, blocked)
    assert card.js_request_count == 1
    assert card.js_bytes == 100
    assert card.request_count == 7 - 3
    # non-JS portion unchanged
    assert card.total_bytes - card.js_bytes == 500 + 100


def test_all_js_blocked():
    snap = make_snapshot()
    blocked = frozenset(u for u in snap.resources if u.endswith(".js"))
    card = resource_metrics(snap, blocked)
    assert card.js_bytes == 0
    assert card.js_request_count == 0
    assert card.total_bytes == 600


def test_conservation_of_bytes():
    snap = make_snapshot()
    blocked = frozenset(list(snap.resources)[2:5])
    full = resource_metrics(snap)
    part = resource_metrics(snap, blocked)
    blocked_bytes = sum(snap.resources[u].body_length for u in blocked)
    assert part.total_bytes + blocked_bytes == full.total_bytes


def test_monotone_in_blocked_set():
    snap = make_snapshot()
    urls = sorted(snap.resources)
    for cut in range(len(urls)):
        smaller = resource_metrics(snap, frozenset(urls[:cut]))
        larger = resource_metrics(snap, frozenset(urls[: cut + 1]))
        assert larger.request_count <= smaller.request_count
        assert larger.total_bytes <= smaller.total_bytes
        assert larger.js_bytes <= smaller.js_bytes


# --- diff ---------------------------------------------------------------------


def test_diff_simple_percentage():
    before = ReportCard(10, 1000, 5, 500, 5)
    after = ReportCard(10, 400, 5, 500, 5)
    assert diff(before, after)["totalBytes"] == 60.0


def test_diff_identical_zero():
    card = ReportCard(10, 1000, 5, 500, 5)
    assert all(v == 0.0 for v in diff(card, card).values())


def test_diff_zero_before_is_na():
    before = ReportCard(0, 0, 0, 0, 0)
    after = ReportCard(0, 0, 0, 0, 0)
    assert all(v == "n/a" for v in diff(before, after).values())


def test_diff_rounds_half_up():
    # 1/3 -> 33.333... -> 33.3 ; 2/3 -> 66.666... -> 66.7 ; .05 % cases round up
    assert diff(ReportCard(3, 3, 3, 3, 3), ReportCard(2, 1, 2, 1, 2))["totalBytes"] == 66.7
    assert diff(ReportCard(2000, 2000, 1, 1, 1), ReportCard(1999, 1999, 1, 1, 1))[
        "requestCount"
    ] == 0.1  # 0.05 rounds half-up


# --- structural similarity -------------------------------------------------------


def test_identical_documents_score_one():
    html = b"<html><body><p>Hello world</p><img src=a.png></body></html>"
    assert structural_similarity(html, html) == 1.0


def test_script_removal_keeps_score_one():
    original = b"<html><body><script>t()</script><p>Hello world</p><img src=a.png></body></html>"
    simplified = b"<html><body><p>Hello world</p><img src=a.png></body></html>"
    assert structural_similarity(original, simplified) == 1.0


def test_half_images_missing():
    original = (
        b"<p>text stays</p>"
        b"<img src=a.png><img src=b.png><img src=c.png><img src=d.png>"
    )
    simplified = b"<p>text stays</p><img src=a.png><img src=b.png>"
    # text jaccard = 1; media jaccard = |{a,b}| / |{a,b,c,d}| = 0.5
    score = structural_similarity(original, simplified)
    assert score == pytest.approx(0.5 * 1.0 + 0.5 * 0.5)


def test_symmetry():
    a = b"<p>one two</p><img src=x.png>"
    b_doc = b"<p>two three</p><img src=y.png>"
    assert structural_similarity(a, b_doc) == structural_similarity(b_doc, a)


def test_token_multiset_counts_matter():
    a = b"<p>word word word</p>"
    b_doc = b"<p>word</p>"
    # multiset jaccard = 1/3
    assert structural_similarity(a, b_doc) == pytest.approx(0.5 * (1 / 3) + 0.5 * 1.0)


def test_visible_text_excludes_script_and_style():
    html = b"<style>p{}</style><script>var x=1;</script><p>Only This</p>"
    assert visible_text_tokens(html) == Counter({"only": 1, "this": 1})


def test_media_urls_tags():
    html = b'<img src="a.png"><video src=v.mp4></video><iframe src="f.html"></iframe><embed src=e.swf>'
    assert media_urls(html) == {"a.png", "v.mp4", "f.html"}


def test_non_bytes_rejected():
    with pytest.raises(TypeError):
        structural_similarity("<p>str</p>", b"<p>bytes</p>")

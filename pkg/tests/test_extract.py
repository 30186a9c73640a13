import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pagetrim.extract import (
    DocumentModel,
    NetworkLogEntry,
    build_inventory,
    is_javascript,
    load_network_log,
    parse_document,
)
from pagetrim.model import ScriptKind


def ranges_are_exact(doc: DocumentModel):
    for node in doc.script_nodes:
        start, end = node.doc_range
        sliced = doc.index_bytes[start:end]
        assert sliced.startswith(b"<"), sliced
        assert sliced.lower().startswith(b"<script")
        assert sliced.rstrip().endswith(b">")


def test_single_inline():
    html = b"<html><body><script>var a=1;</script></body></html>"
    doc = parse_document(html)
    assert len(doc.script_nodes) == 1
    node = doc.script_nodes[0]
    assert node.kind is ScriptKind.INLINE
    assert node.content == b"var a=1;"
    ranges_are_exact(doc)


def test_external_then_inline_ordered_nonoverlapping():
    html = b'<script src="a.js"></script><script>x()</script>'
    doc = parse_document(html)
    assert [n.kind for n in doc.script_nodes] == [ScriptKind.EXTERNAL, ScriptKind.INLINE]
    assert doc.script_nodes[0].src == "a.js"
    assert doc.script_nodes[1].content == b"x()"
    (s0, e0), (s1, e1) = (n.doc_range for n in doc.script_nodes)
    assert s0 < e0 <= s1 < e1
    # byte-exactness: slicing reproduces the nodes verbatim
    assert html[s0:e0] == b'<script src="a.js"></script>'
    assert html[s1:e1] == b"<script>x()</script>"


def test_commented_out_script_ignored():
    html = b"<html><!-- <script>dead()</script> --><body>hi</body></html>"
    doc = parse_document(html)
    assert doc.script_nodes == ()


def test_script_inside_style_ignored():
    html = b'<style>.x{background:url("a")}/*<script>no()</script>*/</style><script>yes()</script>'
    doc = parse_document(html)
    assert len(doc.script_nodes) == 1
    assert doc.script_nodes[0].content == b"yes()"


def test_script_inside_noscript_ignored():
    html = b"<noscript><script src='pixel.js'></script></noscript><script>run()</script>"
    doc = parse_document(html)
    assert len(doc.script_nodes) == 1
    assert doc.script_nodes[0].kind is ScriptKind.INLINE


def test_script_tag_in_attribute_value_ignored():
    html = b'<div data-x="<script>bad()</script>"><script>ok()</script></div>'
    doc = parse_document(html)
    assert len(doc.script_nodes) == 1
    assert doc.script_nodes[0].content == b"ok()"


def test_mixed_case_and_sloppy_close():
    html = b"<SCRIPT TYPE='text/javascript'>a()</SCRIPT ><p>t</p>"
    doc = parse_document(html)
    assert len(doc.script_nodes) == 1
    assert doc.script_nodes[0].content == b"a()"
    assert doc.script_nodes[0].type_attr == "text/javascript"
    ranges_are_exact(doc)


def test_nested_open_is_content_first_close_wins():
    # browser tokenization: script content runs to the first </script>
    html = b"<script>orphan(<p>x</p><script>ok()</script>"
    doc = parse_document(html)
    assert [n.content for n in doc.script_nodes] == [b"orphan(<p>x</p><script>ok()"]


def test_unterminated_script_skipped_with_warning():
    doc = parse_document(b"<p>hi</p><script>never_ends(")
    assert doc.script_nodes == ()
    assert any("unterminated <script>" in w for w in doc.warnings)


def test_unterminated_style_recovers_to_find_scripts():
    html = b"<style>.x{<script>ok()</script>"
    doc = parse_document(html)
    assert [n.content for n in doc.script_nodes] == [b"ok()"]
    assert any("unterminated <style>" in w for w in doc.warnings)


def test_entity_decoded_src():
    html = b'<script src="/a.js?x=1&amp;y=2"></script>'
    doc = parse_document(html)
    assert doc.script_nodes[0].src == "/a.js?x=1&y=2"


def test_unquoted_src():
    html = b"<script src=app.js defer></script>"
    doc = parse_document(html)
    assert doc.script_nodes[0].src == "app.js"


def test_duplicate_src_attr_first_wins():
    html = b'<script src="one.js" src="two.js"></script>'
    doc = parse_document(html)
    assert doc.script_nodes[0].src == "one.js"


def test_close_tag_inside_js_string_still_closes():
    # matches browser tokenization: the first </script closes the element
    html = b'<script>var s="</script>";</script>'
    doc = parse_document(html)
    assert doc.script_nodes[0].content == b'var s="'


def test_garbage_tail_tolerated():
    html = b"<script>f()</script><div <<< junk"
    doc = parse_document(html)
    assert len(doc.script_nodes) == 1


@given(st.binary(max_size=400))
def test_parser_total_on_arbitrary_bytes(data):
    # tolerance invariant: anything parses; ranges stay ordered and in-bounds
    doc = parse_document(data)
    last_end = 0
    for node in doc.script_nodes:
        start, end = node.doc_range
        assert last_end <= start < end <= len(data)
        last_end = end


@given(
    st.lists(
        st.sampled_from(
            [
                b"<script>x()</script>",
                b'<script src="a.js"></script>',
                b"<!-- <script>dead()</script> -->",
                b"<p>text</p>",
                b"<style>p{}</style>",
                b"<script>broken(",
                b"</div>",
                b"plain words ",
            ]
        ),
        max_size=8,
    )
)
def test_parser_counts_match_naive_expectation(parts):
    # outside any live script, a "<script>x()</script>" always yields a node;
    # once a "broken(" script opens, it swallows the next close tag
    html = b"".join(parts)
    doc = parse_document(html)
    expected = 0
    swallow = False
    for part in parts:
        if swallow:
            # an open script eats everything until the next </script,
            # wherever it appears, and becomes one complete node
            if b"</script" in part:
                expected += 1
                swallow = False
            continue
        if part == b"<script>broken(":
            swallow = True
        elif part in (b"<script>x()</script>", b'<script src="a.js"></script>'):
            expected += 1
    assert len(doc.script_nodes) == expected


# --- is_javascript ---------------------------------------------------------


def _entry(url, media, size=10, initiator=None):
    return NetworkLogEntry(url=url, media_type=media, initiator_url=initiator, byte_size=size)


def test_is_javascript_media_type():
    assert is_javascript(_entry("https://x.com/a", "application/javascript"))
    assert is_javascript(_entry("https://x.com/a", "text/javascript; charset=utf-8"))


def test_is_javascript_suffix_fallback():
    assert is_javascript(_entry("https://x.com/tracker.js", "text/plain"))
    assert is_javascript(_entry("https://x.com/m.mjs?v=1", ""))


def test_is_javascript_specific_type_wins_over_suffix():
    assert not is_javascript(_entry("https://x.com/style.css", "text/css"))
    assert not is_javascript(_entry("https://x.com/fake.js", "image/png"))


def test_is_javascript_plain_non_js():
    assert not is_javascript(_entry("https://x.com/readme.txt", "text/plain"))


# --- build_inventory -------------------------------------------------------

BASE = "https://example.com/index.html"


def test_recursive_from_log_difference():
    html = b'<script src="a.js"></script>'
    doc = parse_document(html)
    log = [
        _entry("https://example.com/a.js", "application/javascript"),
        _entry(
            "https://example.com/b.js",
            "application/javascript",
            initiator="https://example.com/a.js",
        ),
    ]
    bodies = {
        "https://example.com/a.js": b"fetch('b.js')",
        "https://example.com/b.js": b"x",
    }
    elements, warnings = build_inventory(doc, log, BASE, bodies)
    assert [e.kind for e in elements] == [ScriptKind.EXTERNAL, ScriptKind.RECURSIVE]
    ext, rec = elements
    assert ext.src == "https://example.com/a.js"
    assert rec.src == "https://example.com/b.js"
    assert rec.parents == (ext.id,)
    assert ext.parents == ()
    assert warnings == []


def test_empty_doc_empty_log():
    elements, _ = build_inventory(parse_document(b"<html></html>"), [], BASE)
    assert elements == []


def test_duplicate_external_tags_distinct_elements():
    html = b'<script src="a.js"></script><script src="a.js"></script>'
    doc = parse_document(html)
    log = [_entry("https://example.com/a.js", "text/javascript")]
    bodies = {"https://example.com/a.js": b"lib"}
    elements, _ = build_inventory(doc, log, BASE, bodies)
    assert len(elements) == 2
    assert elements[0].src == elements[1].src
    assert elements[0].id != elements[1].id
    assert elements[0].doc_range != elements[1].doc_range


def test_inventory_completeness_count():
    html = b'<script>i()</script><script src="a.js"></script>'
    doc = parse_document(html)
    log = [
        _entry("https://example.com/a.js", "text/javascript"),
        _entry("https://example.com/r1.js", "text/javascript", initiator="https://example.com/a.js"),
        _entry("https://example.com/img.png", "image/png"),
    ]
    elements, _ = build_inventory(doc, log, BASE, {})
    inline = [e for e in elements if e.kind is ScriptKind.INLINE]
    external = [e for e in elements if e.kind is ScriptKind.EXTERNAL]
    recursive = [e for e in elements if e.kind is ScriptKind.RECURSIVE]
    assert (len(inline), len(external), len(recursive)) == (1, 1, 1)


def test_chain_depth_three_parents():
    html = b'<script src="a.js"></script>'
    doc = parse_document(html)
    a = "https://example.com/a.js"
    b = "https://example.com/b.js"
    c = "https://example.com/c.js"
    log = [
        _entry(a, "text/javascript"),
        _entry(b, "text/javascript", initiator=a),
        _entry(c, "text/javascript", initiator=b),
    ]
    elements, _ = build_inventory(doc, log, BASE, {a: b"a", b: b"b", c: b"c"})
    by_src = {e.src: e for e in elements}
    assert by_src[b].parents == (by_src[a].id,)
    assert by_src[c].parents == (by_src[b].id,)


def test_initiator_chain_skips_non_element_resource():
    # c.js initiated by a stylesheet which the index requested: the chain
    # walks up and stops at the index, leaving no parent
    html = b"<html></html>"
    doc = parse_document(html)
    css = "https://example.com/s.css"
    c = "https://example.com/c.js"
    log = [
        _entry(css, "text/css", initiator="https://example.com/index.html"),
        _entry(c, "text/javascript", initiator=css),
    ]
    elements, warnings = build_inventory(doc, log, BASE, {})
    assert len(elements) == 1
    assert elements[0].parents == ()
    assert any("no resolvable parent" in w for w in warnings)


def test_missing_body_flagged():
    html = b"<html></html>"
    doc = parse_document(html)
    log = [_entry("https://example.com/ghost.js", "text/javascript", size=123)]
    elements, warnings = build_inventory(doc, log, BASE, {})
    assert elements[0].body_missing
    assert elements[0].byte_size == 123
    assert any("missing resource body" in w for w in warnings)


def test_ids_deterministic_across_runs():
    html = b'<script>i()</script><script src="a.js"></script>'
    doc = parse_document(html)
    log = [_entry("https://example.com/a.js", "text/javascript")]
    bodies = {"https://example.com/a.js": b"lib"}
    first, _ = build_inventory(doc, log, BASE, bodies)
    second, _ = build_inventory(parse_document(html), list(log), BASE, dict(bodies))
    assert [e.id for e in first] == [e.id for e in second]


def test_load_network_log_jsonl(tmp_path):
    p = tmp_path / "log.ndjson"
    lines = [
        {"url": "HTTPS://Example.com:443/a.js", "mediaType": "text/javascript", "byteSize": 5},
        {"url": "https://example.com/b.js", "mediaType": "text/javascript",
         "initiatorUrl": "https://example.com/a.js", "byteSize": 7},
        {"url": "https://example.com/a.js", "mediaType": "text/javascript", "byteSize": 5},
    ]
    p.write_text("\n".join(json.dumps(l) for l in lines), encoding="utf-8")
    entries, warnings = load_network_log(p)
    assert [e.url for e in entries] == [
        "https://example.com/a.js",
        "https://example.com/b.js",
    ]
    assert entries[1].initiator_url == "https://example.com/a.js"
    assert any("duplicate" in w for w in warnings)


def test_load_network_log_bad_line_skipped(tmp_path):
    p = tmp_path / "log.ndjson"
    p.write_text('{"url": "https://a.com/x.js", "mediaType": "text/javascript", "byteSize": 1}\nnot json\n')
    entries, warnings = load_network_log(p)
    assert len(entries) == 1
    assert warnings and "line 2" in warnings[0]

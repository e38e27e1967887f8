import json

from deeplinker.crawl import crawl_ftg, name_fragments, parse_entry_script, screen_hash_hints
from deeplinker.linker import (
    ReleaseManifest,
    build_templates,
    parse_deep_link,
    parse_selection,
    render_deep_link,
    template_for_path,
)
from deeplinker.model import IntentDecl, Label
from deeplinker.navgraph import NavEdge, Path, build_nav_graph, compute_shortcuts, unique_shortcuts
from deeplinker.replay import replay_deep_link, verify_target
from deeplinker.simulator import SimSession
from deeplinker.treehash import tree_hash


def analyzed(model):
    return compute_shortcuts(build_nav_graph(model))


def crawl_named(model, activity, entry_doc):
    ftg = crawl_ftg(lambda: SimSession.launch(model), activity,
                    parse_entry_script(entry_doc))
    name_fragments(ftg, screen_hash_hints(model, activity))
    return ftg


def test_anki_tags_walkthrough(anki):
    shortcuts = analyzed(anki)
    ftgs = {"NoteEditor": crawl_named(anki, "NoteEditor", {
        "intents": [{"intent": {"target": "NoteEditor", "extras": {"CALLER": "int"}},
                     "values": {"CALLER": 3}}],
        "actions": [],
    })}
    manifest = build_templates(anki, shortcuts, ftgs, parse_selection(
        {"targets": [{"activity": "NoteEditor", "fragment": "tags"}]}))
    link = parse_deep_link(manifest, "http://anki.ichi2.com/NoteEditor?CALLER=3#tags")
    trace = replay_deep_link(anki, manifest, link)
    assert [s.kind for s in trace.steps] == ["launch", "intent", "action"]
    assert trace.steps[1].detail == {"target": "NoteEditor", "values": {"CALLER": 3}}
    assert trace.steps[2].detail == {"view": "CardEditorTagButton"}
    assert trace.verdict.kind == "ReachedFragment"
    assert trace.final_activity == "NoteEditor"
    assert trace.step_count == 3
    assert verify_target(trace, link.template)


def test_main_activity_link_is_launch_only(anki):
    shortcuts = analyzed(anki)
    manifest = build_templates(anki, shortcuts, {}, parse_selection(
        {"targets": [{"activity": "DeckPicker"}]}))
    link = parse_deep_link(manifest, "http://anki.ichi2.com/DeckPicker")
    trace = replay_deep_link(anki, manifest, link)
    assert [s.kind for s in trace.steps] == ["launch"]
    assert trace.verdict.kind == "ReachedActivity"
    assert verify_target(trace, link.template)


def direct_to_b_manifest(model):
    """Hand-built single-intent template that skips activity A entirely."""
    graph = build_nav_graph(model)
    labels = frozenset({Label("extra", "foo", "int")})
    direct = Path((graph.launch_edge(),
                   NavEdge("Main", "B", labels, IntentDecl(target="B", labels=labels))))
    template = template_for_path(model, direct)
    return ReleaseManifest(package_name=model.package_name,
                           model_digest=model.digest(),
                           templates=(template,))


def test_dependency_soundness_of_motivating_example(motivating):
    # the naive single-intent link fails on the unset data dependency...
    naive = direct_to_b_manifest(motivating)
    naive_link = parse_deep_link(naive, "http://foo.example.com/B?foo=0")
    naive_trace = replay_deep_link(motivating, naive, naive_link)
    assert naive_trace.verdict.kind == "Failed"
    assert "unset_dependency" in naive_trace.verdict.reason
    assert naive_trace.step_count == 1  # truncated after the launch step
    assert not verify_target(naive_trace, naive_link.template)

    # ...while the derived template routes through A and succeeds
    shortcuts = analyzed(motivating)
    generated = build_templates(motivating, shortcuts, {}, parse_selection(
        {"targets": [{"activity": "B"}]}))
    [template] = generated.templates
    assert [s.kind for s in template.intent_sequence] == ["launch", "intent", "intent"]
    link = render_deep_link(template, {"p1": "x", "foo": 0})
    trace = replay_deep_link(motivating, generated, link)
    assert trace.verdict.kind == "ReachedActivity"
    assert trace.final_activity == "B"
    assert verify_target(trace, template)


def test_replay_is_deterministic(anki):
    shortcuts = analyzed(anki)
    manifest = build_templates(anki, shortcuts, {}, parse_selection(
        {"targets": [{"activity": "CardTemplateEditor"}]}))
    link = parse_deep_link(manifest, "http://anki.ichi2.com/CardTemplateEditor?CALLER=5&modeId=7")
    t1 = replay_deep_link(anki, manifest, link)
    t2 = replay_deep_link(anki, manifest, link)
    assert t1.to_doc() == t2.to_doc()


def test_step_count_equals_sequence_lengths(anki, wallstreet, motivating):
    for model in (anki, wallstreet, motivating):
        shortcuts = analyzed(model)
        targets = [{"activity": a.name} for a in model.activities
                   if unique_shortcuts(shortcuts, a.name)]
        manifest = build_templates(model, shortcuts, {}, parse_selection({"targets": targets}))
        for template in manifest.templates:
            values = {n: _default(t) for n, t in template.parameters}
            trace = replay_deep_link(model, manifest, render_deep_link(template, values))
            assert trace.verdict.reached
            assert trace.step_count == len(template.intent_sequence) + len(template.action_sequence)


def _default(value_type):
    return {"int": 1, "long": 1, "double": 1.0, "boolean": True, "text": "x"}[value_type]


def test_verify_target_wrong_activity(anki):
    shortcuts = analyzed(anki)
    manifest = build_templates(anki, shortcuts, {}, parse_selection(
        {"targets": [{"activity": "DeckPicker"}, {"activity": "CardBrowser"}]}))
    deck, browser = manifest.templates
    trace = replay_deep_link(anki, manifest, render_deep_link(deck, {}))
    assert verify_target(trace, deck)
    assert not verify_target(trace, browser)


def test_verify_target_detects_popup_perturbed_tree(popup):
    shortcuts = analyzed(popup)
    ftg = crawl_named(popup, "HomeActivity", {"intents": [], "actions": []})
    manifest = build_templates(popup, shortcuts, {"HomeActivity": ftg},
                               parse_selection({"targets": [
                                   {"activity": "HomeActivity", "fragment": "report"}]}))
    [template] = manifest.templates
    link = render_deep_link(template, {})
    trace = replay_deep_link(popup, manifest, link)
    assert trace.verdict.kind == "ReachedFragment"
    # oracle: the landing tree is exactly the declared report screen
    report_tree = popup.activity("HomeActivity").screens["report"].view_tree
    assert trace.final_tree_hash == tree_hash(report_tree)

    # a popup over the same screen yields a different hash, so verification
    # against the perturbed tree must fail: the known hash-fragility case
    session = SimSession.launch(popup)
    session.click("promo_button")
    perturbed = tree_hash(session.current_view_tree())
    assert not verify_target(trace, template, expected_hash=perturbed)
    assert perturbed != trace.final_tree_hash


def test_trace_exports(anki):
    shortcuts = analyzed(anki)
    manifest = build_templates(anki, shortcuts, {}, parse_selection(
        {"targets": [{"activity": "NoteEditor"}]}))
    link = parse_deep_link(manifest, "http://anki.ichi2.com/NoteEditor?CALLER=3")
    trace = replay_deep_link(anki, manifest, link)
    doc = trace.to_doc()
    assert doc["verdict"]["kind"] == "ReachedActivity"
    assert doc["stepCount"] == 2
    lines = trace.to_json_lines().splitlines()
    assert len(lines) == 3  # two steps plus the verdict line
    assert json.loads(lines[-1])["kind"] == "verdict"

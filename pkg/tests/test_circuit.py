import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csqip.circuit import (
    BS,
    PM,
    Circuit,
    Detect,
    ExecutionError,
    Homodyne,
    Loss,
    ParseError,
    format_circuit,
    parse_circuit,
    run_circuit,
    schedule,
    with_loss_placement,
)
from csqip.circuit.parser import Value
from csqip.coherent import KetSuperposition, fidelity, DyadMixture, same_terms
from csqip.corpus import NAMES, circuit_text, load_circuit
from csqip.experiments.generators import ghz_target
from csqip.measurement import LabelMeasurement, measure_jointly
from csqip.optics import BeamSplitterSpec, LossSpec, beam_splitter, loss_channel, phase_modulator

BAL = 0.7071067811865476


# --- lexer / parser ---------------------------------------------------------------


def test_fig2_file_structure():
    c = load_circuit("fig2_ghz")
    assert c.mode_count == 3 and len(c.elements) == 2
    assert all(isinstance(e, BS) for e in c.elements)
    assert c.elements[0].r == Value(0.5773503)
    assert c.inputs[0].kind == "cat" and c.inputs[0].values[0] == Value(math.sqrt(3), ("alpha",))


@pytest.mark.parametrize(
    "text, message, line, col",
    [
        ("modes 2\nbs 0 0 0.5", "identical modes", 2, 6),
        ("modes 2\nloss 1 1.3", "outside [0, 1]", 2, 8),
        ("modes 2\nbs 0 1 1.5", "outside [0, 1]", 2, 8),
        ("modes 2\nwarp 0", "unknown keyword", 2, 1),
        ("modes 2\nbs 0 2 0.5", "out of range", 2, 6),
        ("bs 0 1 0.5", "first instruction", 1, 1),
        ("modes 2\ndetect 0 D\ndetect 1 D", "duplicate detector", 3, 10),
        ("modes 2\nonclick Z vac pm 1 pi", "undefined detector", 2, 9),
        ("modes 2\ndetect 0 D\npm 0 pi", "already measured", 3, 4),
        ("modes 2\nhomodyne 0 H\nonclick H vac pm 1 pi", "not 'vac'", 3, 11),
        ("modes 2\ninput 0 coherent beta", "undefined parameter", 2, 18),
        ("modes 2\nbs 0 1 0.5\ninput 0 coherent 1", "precede", 3, 1),
        ("modes 2\ndetect 0 A\nhomodyne 1 H\nfail_when A click and H click", "homodyne", 4, 23),
        ("modes 1\npm 0 1.0 extra", "trailing", 2, 10),
        ("# nothing\n", "missing 'modes", 1, 1),
    ],
)
def test_parse_errors(text, message, line, col):
    with pytest.raises(ParseError) as info:
        parse_circuit(text)
    err = info.value
    assert message in err.message
    assert (err.line, err.col) == (line, col)
    assert str(err).startswith(f"line {line}, col {col}:")


def test_values_and_comments():
    c = parse_circuit("modes 2  # two rails\nparam a 1.5\ninput 0 coherent -2*a 0.5\npm 1 -pi\npm 1 pi*0.5")
    assert c.inputs[0].values == (Value(-2.0, ("a",)), Value(0.5))
    assert c.inputs[0].values[0].resolve(c.param_defaults) == -3.0
    assert c.elements[0].theta == Value(-math.pi)
    assert c.elements[1].theta.coef == pytest.approx(math.pi / 2)


def test_loss_and_detector_options():
    c = parse_circuit("modes 2\nloss 0 0.9 output\nloss 1 0.8\ndetect 0 D ideal\ndetect 1 E")
    assert c.elements[0] == Loss(0, Value(0.9), "output") and c.elements[1].placement is None
    assert c.elements[2] == Detect(0, "D", "ideal") and c.elements[3].model == "exact"
    assert c.n_losses == 2 and set(c.detectors) == {"D", "E"}


# --- formatting ---------------------------------------------------------------------


def test_format_examples():
    c = parse_circuit("modes 2\nbs 0 1 0.70710678118\npm 0 3.141592653589793\npm 1 0.25")
    text = format_circuit(c)
    assert "pm 0 pi" in text and "pm 1 0.25" in text
    assert "bs 0 1 0.70710678118" in text  # not exactly 7 decimals: kept in full
    assert "bs 0 1 0.5773503" in format_circuit(load_circuit("fig2_ghz"))


@pytest.mark.parametrize("name", NAMES)
def test_corpus_round_trip(name):
    c = load_circuit(name)
    assert parse_circuit(format_circuit(c)) == c


_IDS = st.sampled_from(["D1", "D2", "M", "H", "C9", "x_1"])


@st.composite
def circuit_texts(draw):
    n = draw(st.integers(2, 6))
    lines = [f"modes {n}"]
    params = draw(st.lists(st.sampled_from(["alpha", "eta", "k"]), unique=True, max_size=3))
    for p in params:
        lines.append(f"param {p} {draw(st.floats(0.1, 1.0)):.6g}")
    num = st.floats(-3, 3, allow_nan=False).map(lambda x: f"{x:.6g}")
    factor = st.one_of(num, st.sampled_from(params)) if params else num
    value = st.lists(factor, min_size=1, max_size=2).map("*".join)
    for m in sorted(draw(st.sets(st.integers(0, n - 1), max_size=n))):
        if draw(st.booleans()):
            lines.append(f"input {m} coherent {draw(value)}" + (f" {draw(num)}" if draw(st.booleans()) else ""))
        else:
            lines.append(f"input {m} cat {draw(value)} {draw(st.sampled_from(['plus', 'minus']))}")
    live = list(range(n))
    ids: dict[str, str] = {}
    for _ in range(draw(st.integers(0, 8))):
        kind = draw(st.sampled_from(["bs", "pm", "loss", "detect", "homodyne", "onclick", "fail"]))
        if kind == "bs" and len(live) >= 2:
            a, b = draw(st.permutations(live))[:2]
            lines.append(f"bs {a} {b} {draw(st.floats(0, 1)):.7f}")
        elif kind == "pm" and live:
            th = draw(st.one_of(num, st.sampled_from(["pi", "-pi", "pi*0.5"])))
            lines.append(f"pm {draw(st.sampled_from(live))} {th}")
        elif kind == "loss" and live:
            tail = draw(st.sampled_from(["", " input", " output"]))
            lines.append(f"loss {draw(st.sampled_from(live))} {draw(st.floats(0, 1)):.5g}{tail}")
        elif kind in ("detect", "homodyne") and live:
            name = draw(_IDS)
            if name in ids:
                continue
            m = draw(st.sampled_from(live))
            live.remove(m)
            ids[name] = kind
            model = draw(st.sampled_from(["", " exact", " ideal"])) if kind == "detect" else ""
            lines.append(f"{kind} {m} {name}{model}")
        elif kind == "onclick" and ids and live:
            name = draw(st.sampled_from(sorted(ids)))
            sym = draw(st.sampled_from(["plus", "minus"] if ids[name] == "homodyne" else ["vac", "click"]))
            lines.append(f"onclick {name} {sym} pm {draw(st.sampled_from(live))} pi")
        elif kind == "fail":
            dets = sorted(k for k, v in ids.items() if v == "detect")
            if len(dets) >= 2:
                lines.append(f"fail_when {dets[0]} click and {dets[1]} click")
    return "\n".join(lines) + "\n"


@settings(max_examples=300, deadline=None)
@given(circuit_texts())
def test_round_trip_property(text):
    c = parse_circuit(text)
    canon = format_circuit(c)
    assert parse_circuit(canon) == c
    assert format_circuit(parse_circuit(canon)) == canon


def write_fuzz_corpus(directory, count=50, seed=7):
    """Materialize `count` random circuit files (deterministic for a seed)."""
    rng = np.random.default_rng(seed)
    paths = []
    for i in range(count):
        text = _seeded_text(rng)
        p = directory / f"fuzz_{i:02d}.qc"
        p.write_text(text)
        paths.append(p)
    return paths


def _seeded_text(rng) -> str:
    n = int(rng.integers(2, 7))
    lines = [f"modes {n}", "param alpha 2.0"]
    for m in range(n):
        if rng.uniform() < 0.5:
            lines.append(f"input {m} cat {rng.uniform(0.5, 3):.4f}*alpha plus")
        elif rng.uniform() < 0.5:
            lines.append(f"input {m} coherent {rng.normal():.6g} {rng.normal():.6g}")
    live = list(range(n))
    dets = []
    for _ in range(int(rng.integers(1, 9))):
        r = rng.uniform()
        if r < 0.35 and len(live) >= 2:
            a, b = rng.choice(live, 2, replace=False)
            lines.append(f"bs {a} {b} {rng.uniform():.7f}")
        elif r < 0.55 and live:
            th = rng.choice(["pi", "-pi", f"{rng.uniform(-3, 3):.9g}"])
            lines.append(f"pm {rng.choice(live)} {th}")
        elif r < 0.7 and live:
            lines.append(f"loss {rng.choice(live)} {rng.uniform():.4f} {rng.choice(['input', 'output'])}")
        elif r < 0.9 and len(live) > 1:
            m = int(rng.choice(live))
            live.remove(m)
            name = f"D{len(dets)}"
            dets.append(name)
            lines.append(f"detect {m} {name} {rng.choice(['exact', 'ideal'])}")
        elif len(dets) >= 2:
            lines.append(f"fail_when {dets[0]} click and {dets[1]} click")
    lines.append("# trailing comment")
    return "\n".join(lines) + "\n"


def test_fuzz_corpus_round_trip(tmp_path):
    paths = write_fuzz_corpus(tmp_path)
    assert len(paths) == 50
    for p in paths:
        c = parse_circuit(p.read_text())
        assert parse_circuit(format_circuit(c)) == c, p.name


# --- executor ------------------------------------------------------------------------


@pytest.mark.parametrize("name", NAMES)
def test_corpus_completeness(name):
    rep = run_circuit(load_circuit(name))
    assert rep.total_probability == pytest.approx(1.0, abs=1e-9)


def test_fig2_single_branch_fidelity():
    rep = run_circuit(load_circuit("fig2_ghz"), {"alpha": 2.0})
    assert len(rep.branches) == 1 and rep.branches[0].probability == 1.0
    # corpus reflectivities are rounded to 7 decimals, so the match is to ~1e-13, not exact
    f = fidelity(DyadMixture.pure(rep.branches[0].state), ghz_target(2.0))
    assert f == pytest.approx(1.0, abs=1e-10)


def test_fig3_success_probability():
    rep = run_circuit(load_circuit("fig3_tripartite"), {"alpha": 2.0})
    assert rep.p_success == pytest.approx(0.5, abs=1e-3)
    assert rep.p_success == pytest.approx(0.499999915599, abs=1e-11)  # frozen from this run
    assert [b.failed for b in rep.branches] == [False, False, True]


def test_no_measurement_circuit():
    rep = run_circuit(parse_circuit("modes 2\ninput 0 cat 1.3 minus\nbs 0 1 0.3\npm 1 0.2"))
    assert len(rep.branches) == 1 and rep.p_success == 1.0
    d = rep.to_dict()
    assert d == {"branches": [{"outcomes": {}, "prob": 1.0, "failed": False}], "p_success": 1.0}


def test_parameter_overrides():
    c = load_circuit("fig5_lossy")
    with pytest.raises(ExecutionError, match="unknown parameter"):
        run_circuit(c, {"beta": 1.0})
    with pytest.raises(ExecutionError, match="outside"):
        run_circuit(c, {"eta": 1.5})


def test_ambiguous_homodyne_reports_branch():
    c = parse_circuit("modes 2\ninput 0 coherent 2\ninput 1 coherent 0 1\ndetect 0 D\npm 1 0\nhomodyne 1 H")
    with pytest.raises(ExecutionError, match=r"branch \[D="):
        run_circuit(c)


def test_halts_failed_branches_and_feed_forward():
    text = (
        "modes 3\ninput 0 coherent 2\ninput 1 coherent 2\ninput 2 coherent 1\n"
        "detect 0 A exact\ndetect 1 B exact\nfail_when A click and B click\nonclick A vac pm 2 pi"
    )
    rep = run_circuit(parse_circuit(text))
    p = math.exp(-4)
    fail = rep.find(A="click", B="click")
    assert fail.failed and fail.probability == pytest.approx((1 - p) ** 2)
    vac = rep.find(A="vac", B="click")
    assert vac.state.amps[0, 2] == pytest.approx(-1.0)
    assert rep.find(A="click", B="vac").state.amps[0, 2] == pytest.approx(1.0)


def test_schedule_hoists_losses():
    c = parse_circuit("modes 2\nbs 0 1 0.5\nloss 0 0.9 input\ndetect 1 D\nloss 0 0.8 output\npm 0 1\nloss 0 0.7")
    kinds = [(type(e).__name__, getattr(e, "placement", None)) for e in schedule(c.elements)]
    assert kinds == [("Loss", "input"), ("BS", None), ("Loss", "output"), ("Detect", None),
                     ("PM", None), ("Loss", None)]


def _direct_generator(alpha, eta=None):
    """Tripartite generator circuit driven through optics/measurement calls in file order."""
    s = KetSuperposition.cat(alpha)
    for _ in range(3):
        s = s.tensor(KetSuperposition.cat(alpha))
    s = s.tensor(KetSuperposition.coherent(alpha))
    if eta is not None:
        for m in range(5):
            s = loss_channel(s, LossSpec(m, eta))
    for a, b in ((0, 1), (2, 3), (0, 3), (1, 2), (0, 4)):
        s = beam_splitter(s, BeamSplitterSpec.from_reflectivity(a, b, BAL))
    res = measure_jointly(s, [LabelMeasurement(0, "D1"), LabelMeasurement(4, "D2")])
    plus = res[("vac", "click")]
    minus = res[("click", "vac")]
    return plus, minus, phase_modulator(minus.post_state, 3, math.pi)


@pytest.mark.parametrize("name, eta", [("fig3_tripartite", None), ("fig5_lossy", 0.9)])
def test_executor_matches_direct_calls(name, eta):
    params = {"alpha": 2.0} if eta is None else {"alpha": 2.0, "eta": eta}
    rep = run_circuit(load_circuit(name), params)
    plus, minus, corrected = _direct_generator(2.0, eta)
    assert same_terms(rep.find(D1="vac").state, plus.post_state, tol=1e-12)
    assert same_terms(rep.find(D2="vac").state, corrected, tol=1e-12)
    assert rep.find(D1="vac").probability == pytest.approx(plus.probability, abs=1e-12)


def test_executor_matches_direct_ghz():
    rep = run_circuit(load_circuit("fig2_ghz"), {"alpha": 1.7})
    s = KetSuperposition.cat(math.sqrt(3) * 1.7).tensor(KetSuperposition.coherent(0, 0))
    s = beam_splitter(s, BeamSplitterSpec.from_reflectivity(0, 1, 0.5773503))
    s = beam_splitter(s, BeamSplitterSpec.from_reflectivity(0, 2, 0.7071068))
    assert same_terms(rep.branches[0].state, s, tol=1e-12)


def test_env_registry_and_placement():
    c = load_circuit("fig5_lossy")
    rep = run_circuit(c, {"eta": 0.9})
    assert [e.source for e in rep.env] == [0, 1, 2, 3, 4] and rep.env_modes == [5, 6, 7, 8, 9]
    out = with_loss_placement(c, "output")
    assert all(e.placement == "output" for e in out.elements if isinstance(e, Loss))
    rep_out = run_circuit(out, {"eta": 0.9})
    assert rep_out.p_success == pytest.approx(rep.p_success, abs=1e-12)


def test_report_json_schema():
    rep = run_circuit(load_circuit("fig3_tripartite"))
    d = rep.to_dict()
    assert set(d) == {"branches", "p_success"}
    assert set(d["branches"][0]) == {"outcomes", "prob", "failed"}
    assert rep.to_json() == rep.to_json()


def test_missing_bundled_circuit():
    with pytest.raises(FileNotFoundError):
        circuit_text("fig9")

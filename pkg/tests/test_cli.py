import io
import json
import shutil

import pytest

from bpcheck import io as bio
from bpcheck.cli import main, read_review, UsageError

from conftest import FIXTURES

PIPE = FIXTURES / "pipeline"
MODELS, LOG = str(PIPE / "models"), str(PIPE / "log.csv")
OUT = object()  # stands for a fresh output directory


def run(*argv, stdin=""):
    out = io.StringIO()
    code = main(list(argv), stdin=io.StringIO(stdin), stdout=out)
    return code, out.getvalue()


def test_run_matches_golden_files(tmp_path):
    code, _ = run("run", "--models", MODELS, "--log", LOG, "--out-dir", str(tmp_path), "--seed", "1")
    assert code == 0
    for name in ("constraints.jsonl", "selected.json", "report.json"):
        assert (tmp_path / name).read_text() == (PIPE / "expected" / name).read_text(), name


def test_stages_compose_like_run(tmp_path):
    assert run("mine", "--models", MODELS, "--out", str(tmp_path / "c.jsonl"))[0] == 0
    assert run("select", "--constraints", str(tmp_path / "c.jsonl"), "--log", LOG,
               "--out", str(tmp_path / "s.json"), "--seed", "1")[0] == 0
    code, text = run("check", "--log", LOG, "--selected", str(tmp_path / "s.json"),
                     "--out", str(tmp_path / "r.json"), "--text")
    assert code == 0 and text.startswith("count")
    golden = json.loads((PIPE / "expected" / "report.json").read_text())
    assert json.loads((tmp_path / "r.json").read_text())["groups"] == golden["groups"]


def test_outputs_carry_seed_and_config(tmp_path):
    run("run", "--models", MODELS, "--log", LOG, "--out-dir", str(tmp_path), "--seed", "42", "--k", "activity=5")
    _, _, header = bio.read_selection(tmp_path / "selected.json")
    report = json.loads((tmp_path / "report.json").read_text())
    assert header["seed"] == 42 and report["meta"]["seed"] == 42
    assert header["config"]["k"] == {"activity": 5} and report["config"]["k"] == {"activity": 5}
    first = (tmp_path / "constraints.jsonl").read_text().splitlines()[0]
    assert json.loads(first)["meta"]["seed"] == 42


def test_iterative_repair_resolves_the_fixture(tmp_path):
    run("run", "--models", MODELS, "--log", LOG, "--out-dir", str(tmp_path), "--repair", "iterative")
    _, diags, _ = bio.read_selection(tmp_path / "selected.json")
    assert diags and all(d["status"] == "repaired" for d in diags)


@pytest.mark.parametrize(
    "argv",
    [
        ["select", "--constraints", "x.jsonl", "--out", "s.json"],
        ["check", "--selected", "s.json", "--out", "r.json"],
        ["frobnicate"],
        ["run", "--models", MODELS, "--log", LOG, "--out-dir", OUT, "--k", "activity=3", "--tau", "activity=0.5"],
        ["run", "--models", MODELS, "--log", LOG, "--out-dir", OUT, "--k", "plant=3"],
        ["run", "--models", "nowhere", "--log", LOG, "--out-dir", OUT],
    ],
)
def test_usage_errors_exit_1(argv, capsys, tmp_path):
    assert run(*(str(tmp_path / "o") if a is OUT else a for a in argv))[0] == 1
    assert not (tmp_path / "o").exists()
    assert capsys.readouterr().err


def test_data_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("case,activity\n")
    code, _ = run("run", "--models", MODELS, "--log", str(bad), "--out-dir", str(tmp_path / "o"))
    assert code == 2 and "bad.csv" in capsys.readouterr().err


def test_interactive_review_equals_filter_file(tmp_path):
    run("mine", "--models", MODELS, "--out", str(tmp_path / "c.jsonl"))
    (tmp_path / "f.json").write_text(json.dumps({"exclude": {"objects": ["invoice"]}, "pin": []}))
    common = ["select", "--constraints", str(tmp_path / "c.jsonl"), "--log", LOG, "--seed", "3"]
    assert run(*common, "--out", str(tmp_path / "a.json"), "--filter", str(tmp_path / "f.json"))[0] == 0
    assert run(*common, "--out", str(tmp_path / "b.json"), "--interactive", stdin="drop object invoice\ndone\n")[0] == 0
    a, b = (json.loads((tmp_path / n).read_text()) for n in ("a.json", "b.json"))
    assert a == b
    assert not any("invoice" in c["components"].values() for c in a["constraints"] if c["kind"] == "interobj")


def test_review_command_writes_filter(tmp_path):
    selected = PIPE / "expected" / "selected.json"
    key = bio.read_selection(selected)[0][0].key
    code, _ = run("review", "--selected", str(selected), "--out", str(tmp_path / "f.json"),
                  stdin=f"drop role clerk\npin {key}\n\n")
    assert code == 0
    review = bio.read_filter(tmp_path / "f.json")
    assert review.roles == {"clerk"} and review.pin == {key}


def test_read_review_rejects_garbage():
    with pytest.raises(UsageError):
        read_review(io.StringIO("drop planet mars\n"))
    with pytest.raises(UsageError):
        read_review(io.StringIO("drop object order\npin activity|Response|create order|check order\n"))
    listing = io.StringIO()
    read_review(io.StringIO("list\n"), [], listing)


def test_vectors_and_synonyms_options(tmp_path):
    syn = tmp_path / "syn.tsv"
    syn.write_text("check\texamine\n")
    code, _ = run("run", "--models", MODELS, "--log", LOG, "--out-dir", str(tmp_path / "o"),
                  "--vectors", str(FIXTURES / "fitting" / "vectors.tsv"), "--synonyms", str(syn))
    assert code == 0
    _, _, header = bio.read_selection(tmp_path / "o" / "selected.json")
    assert header["similarity"]["mode"] == "vector-file"


def test_evaluate_small(tmp_path):
    models = tmp_path / "models"
    shutil.copytree(PIPE / "models", models)
    code, text = run("evaluate", "--models", str(models), "--folds", "3", "--seed", "5",
                     "--out", str(tmp_path / "m.csv"), "--summary", str(tmp_path / "s.csv"))
    assert code == 0 and "recall=" in text
    header = (tmp_path / "m.csv").read_text().splitlines()[0]
    assert header == "fold,model_id,kind,k,tau,omega,tp,fp,fn,precision,recall"
    assert run("evaluate", "--models", str(models), "--folds", "9", "--out", str(tmp_path / "x.csv"))[0] == 1

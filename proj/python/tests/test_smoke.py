import json
import math

import pytest

import narrative_cantm as nc


@pytest.fixture(scope="module")
def corpus():
    return nc.synthetic_corpus(per_class=30, seed=3)


@pytest.fixture(scope="module")
def model(corpus):
    return nc.Model.train(corpus, kind="cantm", seed=1, config={"cantm": {"epochs": 15}})


def test_text_helpers():
    assert nc.tokenize("Vaccines CAUSE autism!! https://t.co/x") == ["vaccines", "cause", "autism"]
    assert len(nc.CLASSES) == 7


def test_synthetic_corpus_is_balanced(corpus):
    dist = nc.class_distribution(corpus)
    assert dist["total"] == len(corpus)
    assert set(dist["counts"].values()) <= {0, 30}


def test_predict_and_explain(model, corpus):
    doc = corpus[0]
    probs = model.predict_proba(doc["text"])
    assert math.isclose(sum(probs.values()), 1.0, rel_tol=1e-9)
    assert model.predict(doc["text"]) == max(probs, key=probs.get)
    exp = model.explain(doc["text"], n_words=5)
    assert exp["class_words"]["class"] == model.predict(doc["text"])
    assert len(exp["class_words"]["words"]) == 5


def test_save_load_service(model, corpus, tmp_path):
    path = str(tmp_path / "m.ckpt")
    model.save(path)
    again = nc.Model.load(path)
    text = corpus[5]["text"]
    assert again.predict_proba(text) == model.predict_proba(text)

    svc = nc.Service(path)
    assert svc.health()["status"] == "ok"
    status, body = svc.classify(json.dumps({"text": text}))
    assert status == 200 and body["label"] == model.predict(text)
    status, _ = svc.classify("{not json")
    assert status == 400
    status, _ = svc.classify(json.dumps({"text": "!!! ..."}))
    assert status == 422


def test_metrics_and_errors():
    report = nc.metrics(["LF", "LF", "MRE"], ["LF", "MRE", "MRE"])
    assert math.isclose(report["accuracy"], 2 / 3)
    with pytest.raises(nc.NarrativeError):
        nc.metrics(["LF"], ["nope"])


def test_run_cli():
    code, out, _ = nc.run_cli(["--help"])
    assert code == 0 and "train" in out
    code, _, err = nc.run_cli(["no-such-command"])
    assert code == 2 and err

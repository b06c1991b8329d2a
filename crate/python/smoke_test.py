"""Smoke test for the chainball extension module.

Build and install first:
    cd crates/python && maturin build --release -o dist && pip install dist/chainball-*.whl
"""

import json
import math
import os
import random
import sys
import tempfile

import chainball

DIMS = [chainball.FEATURE_LEN, 128, 64, 32, 11]


def random_weights(seed):
    rng = random.Random(seed)
    layers = []
    for i, (n_in, n_out) in enumerate(zip(DIMS, DIMS[1:])):
        scale = 1.0 / math.sqrt(n_in)
        layers.append({
            "w": [[rng.uniform(-scale, scale) for _ in range(n_in)] for _ in range(n_out)],
            "b": [0.0] * n_out,
            "act": "softmax" if i == len(DIMS) - 2 else "relu",
        })
    return {"schema_version": 1, "dims": DIMS, "layers": layers}


def main():
    allf = json.dumps({"name": "all", "flags": {"blocking": True, "ore": True, "unmark_simple": True}})
    base = json.dumps({"name": "base"})

    a = chainball.run_match(allf, base, 4, 300)
    b = chainball.run_match(allf, base, 4, 300)
    assert a == b, (a, b)
    assert a["cycles_played"] == 300

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "w.json")
        with open(path, "w") as f:
            json.dump(random_weights(7), f)
        report = chainball.verify_weights(path)
        assert report["probes"] == 100 and len(report["checksum"]) == 64
        assert report == chainball.verify_weights(path)

        probs = chainball.predict(path, [0.0] * chainball.FEATURE_LEN)
        assert len(probs) == 11 and abs(sum(probs) - 1.0) < 1e-9

        out = chainball.extract(allf, base, 1, os.path.join(d, "ds"), seed=1, cycles=400)
        assert out["train_rows"] + out["test_rows"] == out["rows"]

        bad = os.path.join(d, "bad.json")
        with open(bad, "w") as f:
            json.dump({"schema_version": 1, "dims": [3, 2], "layers": []}, f)
        try:
            chainball.verify_weights(bad)
        except ValueError as e:
            assert "weights" in str(e), e
        else:
            raise AssertionError("bad weights accepted")

    try:
        chainball.run_match('{"flags": {"unmark_passnet": true}}', base, 0, 10)
    except ValueError as e:
        assert "invalid_config" in str(e), e
    else:
        raise AssertionError("invalid config accepted")

    print("smoke ok:", a, report["checksum"][:12])
    return 0


if __name__ == "__main__":
    sys.exit(main())

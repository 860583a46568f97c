"""Secondary acceptance: train real codecs at both bit budgets on the
exported corpus, calibrate on held-out scenario text, and hand the table
back through the simulator's validation command.

Criteria: the 1000-bit codec reaches word error below 5 percent at 10 dB
effective SNR on held-out scenario text; the exported calibration passes
the simulator's `calibrate-check`; the 2000-bit codec dominates the
1000-bit codec at every grid point; the whole run fits a desk-scale
training budget (30 minutes).
"""

import subprocess
import sys
import time

import pytest

from codec_trainer.calibrate import calibrate, write_calibration
from codec_trainer.data import load_corpus_chunks, load_vocabulary, split_heldout
from codec_trainer.train import TrainConfig, train, word_error_rate

GRID_DB = (0.0, 5.0, 10.0)


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    root = tmp_path_factory.mktemp("secondary")
    vocab_path = root / "vocab.json"
    corpus_path = root / "corpus.txt"
    start = time.time()
    subprocess.run([sys.executable, "-m", "semlink", "--export-vocab",
                    str(vocab_path), "--export-corpus", str(corpus_path)],
                   check=True, capture_output=True)
    vocabulary = load_vocabulary(vocab_path)
    corpus = load_corpus_chunks(corpus_path, vocabulary, 30)
    pool, heldout = split_heldout(corpus, fraction=0.15, seed=0)

    models = {}
    losses = {}
    # The wider bottleneck converges faster and gets a shorter schedule.
    for n_bits, hard_steps in ((1000, 1600), (2000, 1400)):
        config = TrainConfig(n_bits=n_bits, soft_steps=400,
                             hard_steps=hard_steps, batch_size=48, seed=0)
        models[n_bits], losses[n_bits] = train(pool, vocabulary, config)
    elapsed = time.time() - start
    return root, models, losses, heldout, elapsed


def test_budget_and_heldout_wer(pipeline):
    _, models, _, heldout, elapsed = pipeline
    wers = [word_error_rate(models[1000], heldout, 10.0, seed=s)
            for s in (11, 12, 13)]
    wer_10 = sum(wers) / len(wers)
    print(f"PASS-INFO  trained wer(1000 bits, 10 dB) on held-out text: "
          f"{wer_10:.4f}; training {elapsed:.0f}s")
    assert wer_10 < 0.05
    assert elapsed < 1800


def test_monotone_in_snr(pipeline):
    _, models, _, heldout, _ = pipeline
    wer_0 = word_error_rate(models[1000], heldout, 0.0, seed=11)
    wer_10 = word_error_rate(models[1000], heldout, 10.0, seed=11)
    print(f"PASS-INFO  wer(1000): 0 dB {wer_0:.4f} > 10 dB {wer_10:.4f}")
    assert wer_10 < wer_0


def test_calibration_passes_simulator_check_and_dominates(pipeline):
    root, models, _, heldout, _ = pipeline
    rows = calibrate(models, heldout, GRID_DB, trials=20_000, seed=5)
    path = root / "calibration_trained.csv"
    write_calibration(rows, path)

    check = subprocess.run([sys.executable, "-m", "semlink", "calibrate-check",
                            str(path)], capture_output=True, text=True)
    print("PASS-INFO  calibrate-check output:\n" + check.stdout.strip())
    assert check.returncode == 0, check.stderr

    wer = {(n, e): w for n, e, w in rows}
    for esnr in GRID_DB:
        assert wer[(2000, esnr)] <= wer[(1000, esnr)], (
            f"2000-bit codec must dominate at {esnr} dB: "
            f"{wer[(2000, esnr)]:.4f} vs {wer[(1000, esnr)]:.4f}")

    # The simulator consumes the trained table unchanged.
    sys.path.insert(0, "")
    from semlink.semantic import load_calibration
    table = load_calibration(path)
    assert table.provenance == "trained"
    assert set(table.budgets()) == {1000, 2000}


def test_loss_curves_recorded(pipeline):
    _, _, losses, _, _ = pipeline
    for n_bits, curve in losses.items():
        assert len(curve) >= 1800
        assert curve[-1] < curve[0]

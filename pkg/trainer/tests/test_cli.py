"""Trainer CLI wiring at minimal scale."""

import json
import subprocess
import sys

from codec_trainer.cli import main


def _export_inputs(tmp_path):
    vocab = tmp_path / "vocab.json"
    corpus = tmp_path / "corpus.txt"
    subprocess.run([sys.executable, "-m", "semlink", "--export-vocab",
                    str(vocab), "--export-corpus", str(corpus)], check=True,
                   capture_output=True)
    return vocab, corpus


class TestCliSmoke:
    def test_train_then_calibrate_then_check(self, tmp_path):
        vocab, corpus = _export_inputs(tmp_path)
        out = tmp_path / "trained"
        code = main(["train", "--vocab", str(vocab), "--corpus", str(corpus),
                     "--n-bits", "200", "--soft-steps", "6", "--hard-steps",
                     "4", "--batch-size", "8", "--out", str(out)])
        assert code == 0
        checkpoint = out / "codec_200.pt"
        assert checkpoint.exists()
        assert json.loads((out / "loss_200.json").read_text())

        table = tmp_path / "cal.csv"
        code = main(["calibrate", "--vocab", str(vocab), "--corpus",
                     str(corpus), "--checkpoints", str(checkpoint),
                     "--esnr-db", "0", "10", "--trials", "300",
                     "--out", str(table)])
        assert code == 0
        check = subprocess.run([sys.executable, "-m", "semlink",
                                "calibrate-check", str(table)],
                               capture_output=True, text=True)
        assert check.returncode == 0, check.stderr

    def test_vocab_mismatch_refused(self, tmp_path):
        vocab, corpus = _export_inputs(tmp_path)
        out = tmp_path / "trained"
        main(["train", "--vocab", str(vocab), "--corpus", str(corpus),
              "--n-bits", "100", "--soft-steps", "2", "--hard-steps", "1",
              "--batch-size", "4", "--out", str(out)])
        # Tamper with the vocabulary file, keeping its recorded hash stale.
        payload = json.loads(vocab.read_text())
        payload["words"].append("extra-word")
        import hashlib
        payload["sha256"] = hashlib.sha256(
            json.dumps(payload["words"], ensure_ascii=False).encode()).hexdigest()
        vocab.write_text(json.dumps(payload))
        code = main(["calibrate", "--vocab", str(vocab), "--corpus",
                     str(corpus), "--checkpoints",
                     str(out / "codec_100.pt"), "--esnr-db", "0", "10",
                     "--trials", "50", "--out", str(tmp_path / "c.csv")])
        assert code == 2

"""Codec architecture: quantizer, gradient surrogate, channel, checkpoints."""

import numpy as np
import pytest
import torch

from codec_trainer.model import (CodecSpec, SentenceCodec, ber_for_esnr_db,
                                 flip_bits, load_checkpoint, quantize_ste,
                                 save_checkpoint)

SPEC = CodecSpec(vocab_size=80, vocab_sha256="x" * 64, words_per_chunk=30,
                 n_bits=120)


class TestQuantizer:
    def test_output_exactly_binary(self):
        torch.manual_seed(0)
        model = SentenceCodec(SPEC)
        model.eval()
        tokens = torch.randint(2, SPEC.vocab_size, (4, 30))
        with torch.no_grad():
            bits = model.encode(tokens)
        values = set(bits.flatten().tolist())
        assert values <= {0.0, 1.0}

    def test_straight_through_gradient_matches_finite_differences(self):
        # Ten-parameter probe: autograd through the quantizer must equal
        # finite differences of the pre-quantization path.
        torch.manual_seed(1)
        probe = torch.nn.Linear(2, 5, bias=False).double()  # 10 parameters
        x = torch.randn(3, 2, dtype=torch.float64)
        weights = torch.randn(3, 5, dtype=torch.float64)

        def soft_path(linear):
            return (weights * torch.sigmoid(linear(x))).sum()

        out = (weights * quantize_ste(torch.sigmoid(probe(x)))).sum()
        out.backward()
        grad_ste = probe.weight.grad.clone().flatten()

        eps = 1e-6
        grad_fd = torch.zeros(10, dtype=torch.float64)
        base_weight = probe.weight.detach().clone()
        for i in range(10):
            for sign in (+1, -1):
                with torch.no_grad():
                    perturbed = base_weight.flatten().clone()
                    perturbed[i] += sign * eps
                    probe.weight.copy_(perturbed.view_as(probe.weight))
                value = soft_path(probe).item()
                grad_fd[i] += sign * value / (2 * eps)
        with torch.no_grad():
            probe.weight.copy_(base_weight)
        rel = (grad_ste - grad_fd).norm() / grad_fd.norm()
        assert rel < 1e-3

    def test_gradient_flows_through_encode(self):
        torch.manual_seed(2)
        model = SentenceCodec(SPEC)
        tokens = torch.randint(2, SPEC.vocab_size, (2, 30))
        bits = model.encode(tokens)
        bits.sum().backward()
        assert model.to_bits.weight.grad is not None
        assert model.to_bits.weight.grad.abs().sum() > 0


class TestChannel:
    def test_flip_rate_statistics(self):
        torch.manual_seed(3)
        bits = torch.zeros(200, 1000)
        flipped = flip_bits(bits, torch.tensor(0.1))
        rate = flipped.mean().item()
        assert rate == pytest.approx(0.1, abs=0.01)

    def test_ber_anchors(self):
        assert float(ber_for_esnr_db(0.0)) == pytest.approx(0.158655, rel=1e-4)
        assert float(ber_for_esnr_db(10.0)) == pytest.approx(7.827e-4, rel=1e-3)

    def test_flip_is_involution_support(self):
        bits = torch.tensor([[0.0, 1.0, 0.0, 1.0]])
        out = flip_bits(bits, torch.tensor(1.0))
        assert torch.equal(out, 1.0 - bits)


class TestArchitecture:
    def test_spec_defaults(self):
        assert SPEC.hidden == 128 and SPEC.blocks == 3

    def test_shapes(self):
        torch.manual_seed(4)
        model = SentenceCodec(SPEC)
        tokens = torch.randint(2, SPEC.vocab_size, (5, 30))
        bits = model.encode(tokens)
        assert bits.shape == (5, SPEC.n_bits)
        decoded = model.decode(bits)
        assert decoded.shape == (5, 30)

    def test_checkpoint_roundtrip(self, tmp_path):
        torch.manual_seed(5)
        model = SentenceCodec(SPEC)
        model.eval()
        path = tmp_path / "codec.pt"
        save_checkpoint(model, path, extra={"losses": [1.0, 0.5]})
        loaded = load_checkpoint(path)
        tokens = torch.randint(2, SPEC.vocab_size, (3, 30))
        with torch.no_grad():
            assert torch.equal(loaded.encode(tokens), model.encode(tokens))
        assert loaded.spec == model.spec

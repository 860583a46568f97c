"""Acceptance suite: one test per exit criterion, each printing a
pass/fail line with the measured quantities and enforcing the stated
tolerance and runtime budget.
"""

import time

import numpy as np
import pytest

from semlink.channel import effective_snr, flat_channel, qam4_ber, sample_channel
from semlink.classic import ClassicPipeline
from semlink.huffman import huffman_decode, huffman_encode
from semlink.ldpc import bsc_llrs, default_code
from semlink.metrics import distinct_1, success_rate
from semlink.scenarios import gen_case1, gen_case2
from semlink.semantic import (SemanticChannel, ablation_calibration,
                              default_calibration, segment, wer_lookup)
from semlink.session import (KnowledgeStore, Seeds, SessionConfig,
                             checklist_for, kb_update, run_session)
from semlink.vocabulary import default_codebook, default_codec_config

ESNR_1234_BETA2 = 2.1979113788431222  # mpmath, 40 digits


def _report(name, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    assert ok, f"{name}: {detail}"


def _session(method, scenario, snr, seed, noise_offset=1000, **kw):
    return SessionConfig(method=method, scenario=scenario, mean_snr_db=snr,
                         seeds=Seeds(seed, seed + noise_offset, seed), **kw)


def _run_cell(method, scenario, snr, seeds, **kw):
    """Run one grid cell; the knowledge-base variant reports its second
    execution after one update cycle."""
    results = []
    for seed in seeds:
        cfg = _session(method, scenario, snr, seed, **kw)
        checklist = checklist_for(cfg)
        if method == "LC+SC(Im+KB)":
            store = KnowledgeStore()
            warmup = run_session(cfg, kb_store=store)
            kb_update(warmup, checklist, store)
            transcript = run_session(
                _session(method, scenario, snr, seed, noise_offset=2000, **kw),
                kb_store=store)
        else:
            transcript = run_session(cfg)
        results.append((transcript,
                        success_rate(transcript.final_report(), checklist)))
    return results


def test_effective_snr_criterion():
    """Uniform fixed point to 1e-9, frozen oracle to 1e-6, bounds on 1e4
    random draws; under one second."""
    start = time.time()
    for s in (0.03, 1.0, 17.5, 400.0):
        assert effective_snr(np.full(48, s), 1.0) == pytest.approx(s, rel=1e-9)
    oracle = effective_snr([1.0, 2.0, 3.0, 4.0], 2.0)
    assert oracle == pytest.approx(ESNR_1234_BETA2, rel=1e-6)
    rng = np.random.default_rng(123)
    for _ in range(10_000):
        snr = rng.uniform(0.01, 60.0, size=int(rng.integers(1, 12)))
        beta = float(rng.uniform(0.2, 4.0))
        val = effective_snr(snr, beta)
        assert snr.min() - 1e-12 <= val <= snr.mean() + 1e-12
    elapsed = time.time() - start
    _report("effective-snr", elapsed < 1.0,
            f"oracle={oracle:.10f}, 1e4 bound checks, {elapsed:.2f}s < 1s")


def test_classic_stack_criterion():
    """Lossless source roundtrip on 1000 scenario strings, end-to-end
    noiseless identity, and channel-code block error rates at the two
    anchor SNRs over >=1000 blocks; under three minutes."""
    start = time.time()
    codebook = default_codebook()
    texts = []
    seed = 0
    while len(texts) < 1000:
        state1, _ = gen_case1(seed)
        texts.extend(r.render() for r in state1.readings)
        texts.extend(a.render() for a in state1.anomalies)
        state2, _ = gen_case2(seed)
        texts.extend("moved " + it.render_target() for it in state2.items)
        seed += 1
    texts = texts[:1000]
    for text in texts:
        assert huffman_decode(huffman_encode(text, codebook), codebook) == text

    pipeline = ClassicPipeline(codebook)
    noiseless = flat_channel(30.0, K=64)
    from semlink.channel import McsProfile
    for i, text in enumerate(texts):
        received, _ = pipeline.send(text, noiseless, McsProfile(), seed=i)
        assert received == text

    code = default_code()
    blers = {}
    for snr_db, n_blocks, seed0 in ((10.0, 2000, 1), (0.0, 1000, 2)):
        p = float(qam4_ber(10 ** (snr_db / 10)))
        rng = np.random.default_rng(seed0)
        msgs = rng.integers(0, 2, size=(n_blocks, code.k), dtype=np.uint8)
        cw = code.encode(msgs)
        rx = cw ^ (rng.random(cw.shape) < p).astype(np.uint8)
        decoded, _ = code.decode(bsc_llrs(rx, np.full(code.n, p)))
        blers[snr_db] = float(np.mean(np.any(decoded != cw, axis=1)))
    elapsed = time.time() - start
    ok = blers[10.0] < 1e-3 and blers[0.0] > 0.1 and elapsed < 180
    _report("classic-stack", ok,
            f"1000 roundtrips ok, BLER(10dB)={blers[10.0]:.2e} < 1e-3, "
            f"BLER(0dB)={blers[0.0]:.3f} > 0.1, {elapsed:.0f}s < 180s")


def test_semantic_channel_criterion():
    """Empirical word error within +-10 percent of the loaded table at each
    anchor point over 1e5 words; shipped anchors enforce the stated
    operating points; under one minute."""
    start = time.time()
    table = default_calibration()
    # Stated operating points hold across the anchored region.
    for esnr in (5.0, 7.5, 10.0):
        assert wer_lookup(table, 1000, esnr) <= 0.01
    assert wer_lookup(table, 1000, 0.0) == pytest.approx(0.10)
    for esnr in (0.1, 5.0, 10.0):
        assert wer_lookup(table, 2000, esnr) <= 0.01

    config = default_codec_config()
    channel = SemanticChannel(config, table)
    words = ["moved", "lamp", "book", "rack-2", "verified", "plate"]
    text = " ".join(words[i % len(words)] for i in range(30)) + " ."
    measured = {}
    for n_bits, esnr in ((1000, 0.0), (1000, 5.0), (2000, 0.0)):
        wer = wer_lookup(table, n_bits, esnr)
        trials = max(3334, int(40 / wer))  # enough flips to resolve 10%
        trials = min(trials, 20_000)
        flips = total = 0
        for s in range(trials):
            out, _ = channel.send(text, n_bits, esnr, seed=s)
            flips += sum(a != b for a, b in zip(text.split()[:30],
                                                out.split()[:30]))
            total += 30
        assert total >= 100_000
        measured[(n_bits, esnr)] = flips / total
        assert flips / total == pytest.approx(wer, rel=0.10)
    elapsed = time.time() - start
    _report("semantic-channel", elapsed < 60,
            f"measured {', '.join(f'{k}={v:.4f}' for k, v in measured.items())}"
            f", {elapsed:.0f}s < 60s")


def test_protocol_trends_criterion():
    """Statistical protocol trends over >=50 seeds per cell (100 where the
    margin is the point); under ten minutes total."""
    start = time.time()
    seeds50 = list(range(1, 51))
    details = []

    # (a) Conventional coding on the household scene at 10 dB: two rounds,
    # full success, completion declared, on every seed.
    cell = _run_cell("Direct", "case2", 10.0, seeds50)
    rounds = [t.num_rounds for t, _ in cell]
    srs = [sr for _, sr in cell]
    ok_a = all(r == 2 for r in rounds) and all(sr == 100.0 for sr in srs) \
        and all(t.completed_by_bs for t, _ in cell)
    details.append(f"(a) rounds={np.mean(rounds):.2f} sr={np.mean(srs):.1f}")
    assert ok_a, details[-1]

    # (b) The same stack collapses at 0 dB in both scenes.
    for scenario in ("case1", "case2"):
        cell = _run_cell("Direct", scenario, 0.0, seeds50)
        mean_sr = float(np.mean([sr for _, sr in cell]))
        details.append(f"(b) {scenario} sr={mean_sr:.2f}")
        assert mean_sr < 1.0, details[-1]

    # (c) Total bandwidth ordering at 10 dB in both scenes.
    for scenario in ("case1", "case2"):
        totals = {}
        for method in ("Direct", "LC", "LC+SC"):
            cell = _run_cell(method, scenario, 10.0, seeds50)
            totals[method] = float(np.mean(
                [t.downlink_bits() + t.uplink_bits() for t, _ in cell]))
        details.append(
            f"(c) {scenario} LC+SC={totals['LC+SC']:.0f} <= LC={totals['LC']:.0f}"
            f" <= Direct={totals['Direct']:.0f}")
        assert totals["LC+SC"] <= totals["LC"] <= totals["Direct"], details[-1]

    # (d) Importance-aware framing beats the plain semantic path at 0 dB.
    seeds100 = list(range(1, 101))
    plain = [sr for _, sr in _run_cell("LC+SC", "case1", 0.0, seeds100)]
    framed = [sr for _, sr in _run_cell("LC+SC(Im)", "case1", 0.0, seeds100)]
    gap_d = float(np.mean(framed) - np.mean(plain))
    details.append(f"(d) Im={np.mean(framed):.2f} vs plain={np.mean(plain):.2f}"
                   f" (gap {gap_d:+.2f})")
    assert gap_d > 2.0, details[-1]

    # (e) The knowledge-base variant dominates at every SNR and reaches a
    # perfect score at 10 dB after one update cycle.
    kb_preloads = []
    for snr in (0.0, 5.0, 10.0):
        framed = [sr for _, sr in _run_cell("LC+SC(Im)", "case1", snr, seeds50)]
        kb_cell = _run_cell("LC+SC(Im+KB)", "case1", snr, seeds50)
        kb = [sr for _, sr in kb_cell]
        kb_preloads.extend(t.kb_preload_bits for t, _ in kb_cell)
        gap = float(np.mean(kb) - np.mean(framed))
        details.append(f"(e) {snr:g}dB KB={np.mean(kb):.2f}"
                       f" vs Im={np.mean(framed):.2f}")
        assert gap > 1.0, details[-1]
        if snr == 10.0:
            kb10 = np.array(kb)
            details.append(f"(e) KB@10dB mean={kb10.mean():.3f}"
                           f" median={np.median(kb10):.1f}")
            assert kb10.mean() >= 99.9 and np.median(kb10) == 100.0, details[-1]

    # (f) Knowledge preload costs hundreds of bits, never thousands.
    preloads = [b for b in kb_preloads if b > 0]
    details.append(f"(f) preload bits min={min(preloads)} max={max(preloads)}")
    assert preloads and all(0 < b < 5000 for b in preloads), details[-1]

    elapsed = time.time() - start
    _report("protocol-trends", elapsed < 600,
            "; ".join(details) + f"; {elapsed:.0f}s < 600s")


def test_ablation_shape_criterion():
    """Compression sweep flat at full score down to ratio 0.6 and strictly
    lower at 0.2; codec score non-decreasing in bit budget; at 0 dB the
    uncompressed codec beats the compressed one; under five minutes."""
    start = time.time()
    details = []

    # Compression-target sweep on a clean channel isolates bandwidth loss.
    seeds = list(range(1, 31))
    lc_sr = {}
    for target in (0.2, 0.6, 0.8, 1.0):
        cell = _run_cell("LC", "case1", 30.0, seeds, compression_target=target)
        lc_sr[target] = float(np.mean([sr for _, sr in cell]))
    details.append("LC " + " ".join(f"{t}:{v:.1f}" for t, v in sorted(lc_sr.items())))
    assert lc_sr[0.6] == lc_sr[0.8] == lc_sr[1.0] == 100.0, details[-1]
    assert lc_sr[0.2] < 100.0, details[-1]

    # Bit-budget sweep at 0 dB (uncompressed codec, extended table).
    table = ablation_calibration()
    sc_sr = []
    budgets = (250, 500, 1000, 2000)
    for n_bits in budgets:
        srs = []
        for seed in seeds + list(range(31, 51)):
            cfg = _session("LC+SC", "case1", 0.0, seed,
                           compression_target=1.0, n_bits=n_bits,
                           n_prime_bits=2 * n_bits)
            transcript = run_session(cfg, calibration=table)
            srs.append(success_rate(transcript.final_report(),
                                    checklist_for(cfg)))
        sc_sr.append(float(np.mean(srs)))
    details.append("SC " + " ".join(f"{b}:{v:.1f}"
                                    for b, v in zip(budgets, sc_sr)))
    assert all(b >= a for a, b in zip(sc_sr, sc_sr[1:])), details[-1]

    # At 0 dB, compression increases the impact of semantic errors.
    seeds50 = list(range(1, 51))
    sc_only = [sr for _, sr in _run_cell("LC+SC", "case1", 0.0, seeds50,
                                         compression_target=1.0)]
    lc_sc = [sr for _, sr in _run_cell("LC+SC", "case1", 0.0, seeds50)]
    details.append(f"0dB SC={np.mean(sc_only):.2f} vs LC+SC={np.mean(lc_sc):.2f}")
    assert np.mean(sc_only) >= np.mean(lc_sc), details[-1]

    elapsed = time.time() - start
    _report("ablation-shape", elapsed < 300,
            "; ".join(details) + f"; {elapsed:.0f}s < 300s")


def test_determinism_criterion(tmp_path):
    """The full shipped grid, run twice, produces byte-identical per-run
    CSV files."""
    from semlink.cli import main
    start = time.time()
    out1, out2 = tmp_path / "run1", tmp_path / "run2"
    assert main(["run", "--config", "paper_grid", "--out", str(out1),
                 "--parallel", "4"]) == 0
    assert main(["run", "--config", "paper_grid", "--out", str(out2),
                 "--parallel", "4"]) == 0
    identical = True
    for name in ("results_case1.csv", "results_case2.csv"):
        identical &= (out1 / name).read_bytes() == (out2 / name).read_bytes()
    # The shipped grid populates every cell: 5 methods x 3 SNRs per case.
    for name in ("summary_case1.csv", "summary_case2.csv"):
        rows = (out1 / name).read_text().strip().splitlines()
        assert len(rows) == 1 + 15, name
    elapsed = time.time() - start
    _report("determinism", identical,
            f"paper_grid twice, per-run CSVs byte-identical, "
            f"all 15 summary cells per case, {elapsed:.0f}s")


def test_closure_criterion():
    """A noiseless conventional run scores full marks on 100 seeds in both
    scenes: scenarios, agents and metrics close the loop."""
    start = time.time()
    for scenario in ("case1", "case2"):
        for seed in range(1, 101):
            cfg = _session("Direct", scenario, 30.0, seed)
            transcript = run_session(cfg)
            sr = success_rate(transcript.final_report(), checklist_for(cfg))
            assert sr == 100.0, f"{scenario} seed {seed}: SR {sr}"
    elapsed = time.time() - start
    _report("closure", True,
            f"SR=100 on 100 seeds x both scenarios at 30 dB, {elapsed:.0f}s")

#!/usr/bin/env python3
"""Drive a small experiment grid through the library API, aggregate the
results, and show the equivalent command-line invocations."""

from semlink import (KnowledgeStore, Seeds, SessionConfig, aggregate,
                     checklist_for, kb_update, result_from_transcript,
                     run_session)

results = []
for method in ("Direct", "LC", "LC+SC"):
    for snr in (0.0, 10.0):
        for seed in range(1, 9):
            config = SessionConfig(method=method, scenario="case2",
                                   mean_snr_db=snr,
                                   seeds=Seeds(seed, seed + 1000, seed))
            transcript = run_session(config)
            results.append(result_from_transcript(
                transcript, checklist_for(config), seed))

print(f"{'method':8s} {'snr':>5s} {'n':>3s} {'SR':>7s} {'std':>6s} "
      f"{'down':>8s} {'up':>8s} {'rounds':>6s}")
for row in aggregate(results):
    print(f"{row.method:8s} {row.snr_db:5.1f} {row.count:3d} "
          f"{row.sr_mean:7.2f} {row.sr_std:6.2f} "
          f"{row.downlink_bits_mean:8.0f} {row.uplink_bits_mean:8.0f} "
          f"{row.rounds_mean:6.2f}")

print("""
The command line covers the full grids and sweeps:

  semlink run --config paper_grid --out results/paper_grid --parallel 4
  semlink run --config smoke --methods Direct --snr-db 10 --seeds 1 \\
': '          --scenario case2 --out results/one_row
  semlink ablation --config ablation --out results/ablation
  semlink calibrate-check path/to/calibration.csv
  semlink export --vocab vocab.json --corpus corpus.txt
""".replace("': '", "            "))

#!/usr/bin/env python3
"""Run one multi-round task session per method and compare the outcome,
bandwidth and diversity metrics."""

from semlink import (METHODS, KnowledgeStore, Seeds, SessionConfig,
                     checklist_for, distinct_1, run_session, success_rate)

print(f"{'method':14s} {'snr':>5s} {'rounds':>6s} {'outcome':14s} "
      f"{'SR':>6s} {'down':>7s} {'up':>7s} {'d1':>6s}")
print("-" * 75)

for snr in (10.0, 0.0):
    for method in METHODS:
        config = SessionConfig(method=method, scenario="case1",
                               mean_snr_db=snr, seeds=Seeds(11, 12, 11))
        store = KnowledgeStore() if method == "LC+SC(Im+KB)" else None
        transcript = run_session(config, kb_store=store)
        checklist = checklist_for(config)
        sr = success_rate(transcript.final_report(), checklist)
        d1 = distinct_1(transcript.sent_texts())
        print(f"{method:14s} {snr:5.1f} {transcript.num_rounds:6d} "
              f"{transcript.outcome:14s} {sr:6.1f} "
              f"{transcript.downlink_bits():7d} {transcript.uplink_bits():7d} "
              f"{d1:6.3f}")

print()
config = SessionConfig(method="LC+SC", scenario="case1", mean_snr_db=0.0,
                       seeds=Seeds(11, 12, 11))
transcript = run_session(config)
record = transcript.rounds[0]
print("Round 1 of the semantic session at 0 dB:")
print(f"  query sent     : {record.query_sent[:100]}")
print(f"  query received : {record.query_received[:100]}")
print(f"  reply received : {record.response_received[:100]}")

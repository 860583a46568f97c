#!/usr/bin/env python3
"""The conventional path: canonical Huffman source coding plus rate-1/2
LDPC channel coding over the fading link."""

from semlink import ClassicPipeline, McsProfile, sample_channel
from semlink.huffman import huffman_encode
from semlink.vocabulary import default_codebook

message = ("sweep report : t-01 24.6 c at rack-2 ; t-02 31.9 c at rack-5 ; "
           "cam-01 455 lux at rack-1 . warning : oil-stain detected near the "
           "loading bay . report finished .")

pipeline = ClassicPipeline(default_codebook())
source_bits = huffman_encode(message, pipeline.codebook).size
print(f"message: {len(message)} chars -> {source_bits} source bits "
      f"({source_bits / len(message):.2f} bits/char) -> "
      f"{pipeline.bits_on_air(message)} bits on air (rate 1/2, whole blocks)")
print()

for mean_db in (10.0, 4.0, 0.0):
    realization = sample_channel(seed=3, K=64, mean_snr_db=mean_db)
    received, bits = pipeline.send(message, realization, McsProfile(), seed=9)
    status = "clean" if received == message else "corrupted"
    print(f"--- mean SNR {mean_db:4.1f} dB ({status})")
    print(f"    {received[:110]}")
print()
print("At 10 dB the code corrects essentially everything; at 0 dB the")
print("decoder fails and downstream text shows character-level damage.")

"""Sentence codec trainer for the link simulator (consumes its exported
vocabulary and corpus; produces its calibration CSV)."""

from .data import Vocabulary, VocabularyMismatch, load_corpus_chunks, load_vocabulary
from .model import CodecSpec, SentenceCodec, load_checkpoint, save_checkpoint
from .train import TrainConfig, train, word_error_rate
from .calibrate import calibrate, write_calibration

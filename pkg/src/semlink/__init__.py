"""Seed-deterministic simulator for semantic agent-to-agent communication
over noisy OFDM links.

The package models the link as per-subcarrier SNRs with an exponential
effective-SNR abstraction, ships a conventional Huffman+LDPC pipeline and
a calibrated word-error semantic pipeline, drives multi-round task
sessions between deterministic mock agents with importance-aware framing
and a task knowledge base, and scores task success, text diversity and
bandwidth.
"""

from .channel import (ChannelRealization, McsProfile, SubchannelPlan,
                      effective_snr, effective_snr_db, flat_channel,
                      group_esnr, group_esnr_db, partition_subchannels,
                      qam4_ber, sample_channel, transmit_bits)
from .classic import ClassicPipeline, send_classic
from .huffman import (HuffmanCodebook, huffman_build, huffman_decode,
                      huffman_encode)
from .ldpc import LdpcCode, bsc_llrs, default_code
from .semantic import (CalibrationTable, MissingCalibrationError,
                       SemanticChannel, SemanticCodecConfig, SentenceChunk,
                       build_config, default_calibration, desegment,
                       load_calibration, save_calibration, segment,
                       send_semantic, wer_lookup)
from .agents import (AgentKnowledge, KeyItem, KeyItemSet, TaskComplete,
                     TaskRequest, bs_plan, compress, evaluate_task, extract,
                     make_knowledge, reconstruct, robot_respond)
from .importance import (PartitionedMessage, ReceivedParts, partition,
                         reassemble, transmit_partitioned)
from .scenarios import (Anomaly, EnvHandle, GoalChecklist, HouseholdState,
                        SensorReading, WarehouseState, env_query, gen_case1,
                        gen_case2, scenario_to_json)
from .session import (METHODS, KnowledgeStore, RoundRecord, Seeds,
                      SessionConfig, SessionTranscript, bandwidth_report,
                      checklist_for, kb_update, run_session)
from .metrics import (RunResult, UndefinedMetricError, aggregate, distinct_1,
                      result_from_transcript, success_rate)
from .vocabulary import (corpus_text, default_codebook, default_codec_config,
                         export_corpus, export_vocabulary, vocabulary_words)

__version__ = "0.1.0"

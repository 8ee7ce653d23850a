"""Speech-corpus extraction from long recordings with inexact subtitles."""
from ._accel import NUMBA_ENABLED, backend_name
from .align import (AlignmentOp, MatchingBlock, SWParams, bidirectional_valid_pairs, local_align,
                    matching_blocks, smith_waterman, transfer_timestamps)
from .corpusio import (AudioRef, CorpusSplit, ProgramRecording, SubtitleCue, make_dev_split,
                       parse_program_bundle, write_corpus, write_program_bundle)
from .decoder import ErrorConfig, GroundTruthTrack, HypToken, SimulatedDecoder, simulated_decode
from .extract import (PipelineConfig, ProgramStats, Segment, clean_segment, merge_segments,
                      realign_unmatched, run_pipeline, segment_long_recording)
from .metrics import GENRES, cer, extraction_rate, genre_stats
from .ngram_lm import (NGramModel, build_biased_lm, count_ngrams, estimate_mkn, interpolate_em,
                       perplexity, prune, read_arpa, sequence_log10prob, write_arpa)
from .textnorm import NormalizationConfig, Token, arabic_to_kanji, kanji_to_int, normalize_tokens

__version__ = "0.1.0"

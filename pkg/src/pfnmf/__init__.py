"""Drum transcription with partially fixed NMF, solved by MUR or NeNMF."""

from .audio import AudioBuffer, Spectrogram, load_wav, stft_magnitude
from .dictionary import Dictionary, assemble_dictionary, build_component, load_dictionary, save_dictionary
from .factor import ConvergenceTrace, FactorState, NumericalError, loss, random_init
from .mur import MurConfig, mur_step, run_mur
from .nenmf import NenmfConfig, OgmConfig, nenmf_step, ogm, run_nenmf, spectral_norm
from .onsets import (
    EvalCounts,
    MedianThresholdConfig,
    OnsetList,
    annotations_to_frame_counts,
    counts_topk,
    detect_median,
    detect_topk,
    f_score,
    match_onsets,
)

__version__ = "0.1.0"

"""Empirical complexity fitting, code embeddings and tree classifiers."""

from rtheta.complexity_model import CandidateBasis, FamilyKind, candidate_grid, evaluate_basis
from rtheta.embedding import CodeEmbedding, build_embedding
from rtheta.fitter import FitQuadruple, FitScore, Sample, fit_candidate, select_best

__version__ = "0.1.0"

__all__ = [
    "CandidateBasis",
    "CodeEmbedding",
    "FamilyKind",
    "FitQuadruple",
    "FitScore",
    "Sample",
    "build_embedding",
    "candidate_grid",
    "evaluate_basis",
    "fit_candidate",
    "select_best",
]

"""
Koopman Module
==============
Regularised (extended) DMD: fit a Koopman matrix on lifted snapshot pairs,
propagate it forward and inspect its spectrum.

Usage:
    from modules.koopman import fit_koopman, predict, spectrum
    from modules.observables import make_dictionary

    dictionary = make_dictionary("identity", pair.labels)
    model = fit_koopman(pair, dictionary, lambda_=1e-12)
    print(model.fit_meta.residual_fro)
    print(spectrum(model).top(5))
"""

from .models import FitMeta, KoopmanModel, SpectrumResult
from .service import (
    fit_koopman,
    load_model,
    model_frame,
    one_step_residual,
    predict,
    recovery_error,
    save_model,
    spectrum,
)
from .solver import RidgeInfo, default_lambda, ridge_solve

__all__ = [
    # Models
    "FitMeta",
    "KoopmanModel",
    "SpectrumResult",
    # Service
    "fit_koopman",
    "load_model",
    "model_frame",
    "one_step_residual",
    "predict",
    "recovery_error",
    "save_model",
    "spectrum",
    # Solver
    "RidgeInfo",
    "default_lambda",
    "ridge_solve",
]

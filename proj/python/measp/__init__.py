"""Multi-engine answer set programming: ground programs, features,
engine selection and per-instance solving."""

import json as _json

from ._measp import (  # noqa: F401
    ModelError,
    OracleScaleExceeded,
    ParseError,
    RegistryError,
    SelectionError,
    SolveError,
    answer_sets,
    feature_names,
    features,
    features_csv,
    generate,
    greedy_pool,
    is_answer_set,
    manifest_version,
    normalize_program,
    pca,
    predict,
    reduct,
    report_csv,
    run_engine,
    select_by_uniqueness,
    solve,
    sota,
    competition_matrix_csv,
    train,
    unique_counts,
)
from ._measp import cross_validate as _cross_validate


def cross_validate(matrix_csv, features_csv, algorithm="nn", params=None, folds=10, repeats=10, seed=1):
    """Stratified repeated cross-validation; returns the report as a dict."""
    return _json.loads(_cross_validate(matrix_csv, features_csv, algorithm, params, folds, repeats, seed))

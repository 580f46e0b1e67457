"""Character-level grammatical gender classifier for Swedish nouns."""

from gendernet._core import (
    ClassMetrics,
    DatasetSplit,
    EncodedWord,
    EpochStats,
    EvalReport,
    LabeledWord,
    Model,
    PredictionSample,
    SampledPredictions,
    SuffixStat,
    TrainConfig,
    TrainHistory,
    TrainResult,
    Vocabulary,
    build_report,
    build_vocabulary,
    count_parameters,
    decode_indices,
    encode_word,
    evaluate,
    export_hidden_states,
    filter_suffix_test_set,
    gradient_check,
    load_dataset,
    load_model,
    majority_baseline,
    make_model,
    report_to_json,
    sample_predictions,
    save_model,
    split_dataset,
    suffix_statistics,
    synthesize_dataset,
    train,
    write_dataset,
    write_history,
)

__all__ = [
    "ClassMetrics",
    "DatasetSplit",
    "EncodedWord",
    "EpochStats",
    "EvalReport",
    "LabeledWord",
    "Model",
    "PredictionSample",
    "SampledPredictions",
    "SuffixStat",
    "TrainConfig",
    "TrainHistory",
    "TrainResult",
    "Vocabulary",
    "build_report",
    "build_vocabulary",
    "count_parameters",
    "decode_indices",
    "encode_word",
    "evaluate",
    "export_hidden_states",
    "filter_suffix_test_set",
    "gradient_check",
    "load_dataset",
    "load_model",
    "majority_baseline",
    "make_model",
    "report_to_json",
    "sample_predictions",
    "save_model",
    "split_dataset",
    "suffix_statistics",
    "synthesize_dataset",
    "train",
    "write_dataset",
    "write_history",
]

__version__ = "0.1.0"

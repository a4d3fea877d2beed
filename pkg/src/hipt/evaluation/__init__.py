from .bc import (
    BCDataset,
    BCModel,
    DisjointSplitError,
    assert_disjoint,
    dataset_from_episodes,
    split_episodes,
    train_bc,
)
from .harness import EvalReport, EvalRow, EvalSuite, evaluate_pair, evaluate_vs_population
from .report import emit_report, parse_report_csv, rows_to_csv, rows_to_text

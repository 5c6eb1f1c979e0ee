"""Cross-modal subspace learning and fine-grained retrieval benchmarking.

Nine linear subspace methods (CCA, PLS, BLM, GMLDA, GMMFA, CDFE, CCA-3V,
LCFS, JFSSL) over paired two-modality feature datasets, plus the evaluation
protocol around them: cosine-ranked retrieval in both directions, MAP and
acc@K/CMC metrics, repeated random splits with summary statistics, t-tests,
lambda sweeps, and timing.
"""

from ._version import __version__
from .bench import (
    BenchmarkConfig,
    BoxStats,
    MethodSpec,
    TTestResult,
    box_stats,
    compute_ttests,
    config_from_dict,
    default_method_specs,
    lambda_sweep,
    measure_fit_time,
    run_benchmark,
    students_t_test,
    summary_stats,
)
from .dataset_io import (
    FeatureMatrix,
    PairedMultimodalDataset,
    SplitPlan,
    encode_labels,
    load_dataset,
    random_split,
    save_dataset,
    stratified_split,
    subset,
)
from .errors import ConfigError, DataError, NumericalError, XmsError
from .methods import (
    CdfeConfig,
    GmaConfig,
    PlsDecomposition,
    SparseCoupledConfig,
    SubspaceModel,
    fit_blm,
    fit_cca,
    fit_cca3v,
    fit_cdfe,
    fit_gma,
    fit_gmlda,
    fit_gmmfa,
    fit_jfssl,
    fit_lcfs,
    fit_method,
    fit_pls,
    load_model,
    project,
    save_model,
)
from .preprocess import PcaModel, center_fit, pca_apply, pca_fit
from .retrieval_eval import (
    RankedList,
    RetrievalEvaluation,
    acc_at_k,
    average_precision,
    cmc_curve,
    evaluate_direction,
    mean_average_precision,
    rank_by_cosine,
)
from .synthetic import make_synthetic_dataset

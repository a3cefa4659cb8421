"""Baldwin-effect adaptive walks on NK landscapes under haploid-diploid lifecycles."""

from .charts import chart_from_records, render_svg
from .experiment import RunConfig, RunRecord, SuiteConfig, derive_seeds, figure_preset, run_suite, run_walk
from .genetics import CrossoverKind
from .landscape import NkLandscape, dumps, fitness, generate_landscape, global_optimum, load, loads, save
from .stats import report_csv, significance_report, summarize, welch_t_test
from .strategies import (
    AsexualDiploid,
    Average,
    BaldwinLearning,
    Baseline,
    Endomitosis,
    HaploidWeighted,
    RandomDominant,
    SpeciesState,
    Syngamy,
    TwoStepMeiosis,
    apply_generation,
)

__version__ = "0.1.0"

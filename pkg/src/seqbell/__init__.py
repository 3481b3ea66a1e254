"""seqbell: sequential single-photon Bell-test simulator.

A deterministic pilot-wave photon model traversing polarizing beam
splitters, finite non-contextual strategy tables, a quantum oracle, and
a CHSH engine that certifies the non-contextual bound by brute force
and demonstrates that sequential measurements escape it.
"""
from ._version import __version__
from .hv_models import (
    AnalyzerSetting,
    PhotonHiddenState,
    StrategyTable,
    StrategyTableError,
    conditional_prob_P1,
    conditional_prob_P2,
    normalize_angle,
    pbs_traverse,
    random_strategy_table,
    response_A,
    response_B_contextual,
    sequential_outcomes,
    strategy_response,
)
from .quantum_reference import (
    JointDistribution,
    collapse,
    epr_pair_correlation,
    malus_probability,
    sequential_correlation_qm,
    sequential_joint,
)
from .bell_engine import (
    ChshResult,
    ChshSettings,
    ContextualityReport,
    CorrelationEstimate,
    check_bell_inequality,
    chsh_from_table,
    chsh_number,
    enumerate_deterministic_bound,
    estimate_sequential_correlation,
    exact_differing_measure,
    exact_sequential_correlation,
    exact_sequential_joint,
    factorization_probe,
    noncontextual_expectation,
    pilot_wave_exact_source,
    pilot_wave_mc_source,
    product_identity_check,
    quantum_oracle_source,
    strategy_factorization_probe,
    verify_decomposition,
)
from .runner import (
    ConfigError,
    Report,
    ScenarioConfig,
    ScenarioError,
    emit_report,
    load_config,
    run_scenario,
)

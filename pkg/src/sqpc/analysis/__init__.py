"""Closed forms, oracles, Monte Carlo estimators and resource accounting."""
from .detection import (
    CHUNK,
    REFERENCE_PER_UNIT,
    AbortEstimate,
    ClosedForm,
    DetectionEstimate,
    abort_rate_mc,
    detection_closed_form,
    detection_rate_mc,
    oracle_per_unit,
    probe_labels,
    reference_value,
    s1_episode,
    s3_episode,
    units_per_run,
)
from .efficiency import (
    EfficiencyRecord,
    ResourceAudit,
    efficiency_catalog,
    qubit_efficiency,
    resource_audit,
)
from .oracles import chi_vector, dephasing_oracle, intercept_resend_oracle, measure_resend_oracle
from .sweeps import FAIL, PASS, CorrectnessReport, IndependenceReport, correctness_sweep, tp_ignorance_test

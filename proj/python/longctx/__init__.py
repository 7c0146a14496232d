"""Long-context position-embedding toolkit.

Rotary and multimodal rotary position math, context-extension transforms,
a toy attention engine with a needle-retrieval harness, training-data
packing, and hybrid-resolution token planning. The heavy lifting lives in
the C++ extension module.
"""

from ._core import (  # noqa: F401
    BaseRecommendation,
    BudgetComparison,
    DimensionLayout,
    ExtensionMethod,
    ExtensionPlan,
    FramePlan,
    FrequencyBasis,
    HybridConfig,
    ModalitySpan,
    PackEntry,
    PackManifest,
    Position3D,
    Sample,
    SampleCategory,
    ScheduleStage,
    Turn,
    apply_mrope,
    apply_rotary,
    assign_positions,
    attention,
    bundled_base_table_entries,
    classify_length,
    compare_budgets,
    effective_length,
    extend_extrapolation,
    extend_mropepp,
    extend_ntk,
    extend_pi,
    layout_for_head_dim,
    make_basis,
    mrope_score,
    mropepp_ramp,
    pack_samples,
    parse_chatml,
    plan_hybrid,
    progressive_schedule,
    recommend_base,
    rotation_matrix,
    run_haystack,
    scale_factor,
    segment_name,
    serialize_bundled_base_table,
    serialize_chatml,
    text_positions,
    tradeoff_table,
    video_frame_budget,
    wavelength,
)

__version__ = "0.1.0"

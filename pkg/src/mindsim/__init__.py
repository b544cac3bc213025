"""Dynamic mental-state modeling, identification, and one-step behavioral control."""

from .control import (ControllerConfig, ControllerState, OneStepController, choose_input, cost,
                      predict_next, reset_state)
from .errors import (DataError, MindsimError, NumericalError, StabilityError, StructuralError)
from .identify import (IdentificationConfig, IdentReport, ParameterBounds, ParamLayout,
                       assess_identifiability, dm_accuracy, free_run_mse, identify,
                       identify_approach_a, identify_approach_b, identify_conventional,
                       identify_dm, mse, optimize, predict_one_ahead, simplify_model,
                       warm_start_perception)
from .model import (ALL_CONTROL_INPUTS, ControlInput, Linkage, MentalState, ModelSpec,
                    ParameterSet, PerceptionChannel, PerceptionFilter, RealLifeData,
                    advance, check_stability, chess_session_spec, cognition_step,
                    eval_channel, intention_strengths, max_weight_matrix, perceptual_access,
                    rational_reasoning, select_actions, spectral_radius, state_from_measured,
                    weight_lookup)
from .pipeline import (ExperimentConfig, exact_paired_permutation_p, run_all, run_collect,
                       run_compare, run_identify, run_report, run_synth_gen)
from .simulate import (SessionConfig, SessionScript, SyntheticParticipant, UniformController,
                       demo_parameter_set, participant_perform, participant_step,
                       perturb_parameter_set, rating_to_level, rule_based_controller,
                       run_session)
from .trace import (ChannelNormalizer, Dataset, MeasurementRecord, SessionTrace,
                    quantize_answers, split_dataset)

__version__ = "0.1.0"

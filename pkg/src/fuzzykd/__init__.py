"""TSK fuzzy classifiers with decoupled knowledge distillation."""

from .basis import basis_dim, basis_labels, expand_basis, stack_design_matrix
from .data import (Dataset, FoldPlan, load_bundled, load_csv, normalize,
                   regroup_cleveland, stratified_folds)
from .distill import (DistillConfig, SoftLabelSet, dkd_loss, distill,
                      kd_loss, soft_labels, teacher_logits,
                      vanilla_kd_distill)
from .harness import (GridSpec, MethodReport, accuracy, format_report,
                      rule_readout, run_method, sweep, weighted_f)
from .rules import (PARTITION, PARTITION_LABELS, RuleBase, build_rule_base,
                    firing_strengths)
from .serialize import load_model, save_model
from .student import (StudentModel, TrainConfig, TrainingDiverged,
                      cross_entropy, init_student, onehot_encode,
                      predict_student, softmax, student_logits,
                      train_student)
from .teacher import TeacherModel, fit_teacher, predict_teacher

__version__ = "0.1.0"

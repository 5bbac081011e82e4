from .features import encode_cksaap, encode_onehot_pair
from .metrics import EvalMetrics, evaluate
from .models import TrainConfig, train_logreg, train_mlp
from .runner import mean_by_antigens, run_benchmark
from .splits import SplitPlan, make_split_plan
from .stats import dataset_stats, pairwise_identity_distribution

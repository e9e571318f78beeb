"""
Schedule policy parsing and construction.
"""
from .base import ValidationSchedule
from .context_wise import ContextWiseSchedule
from .fixed import ExponentialSchedule, StrideSchedule
from ..core.enums import ScheduleKind, SimilarityAggregation
from ..core.parameters import DEFAULT_LAMBDA, DEFAULT_THRV, SchedulePolicy


def parse_schedule(
    text: str,
    lam: float = DEFAULT_LAMBDA,
    thrv: float = DEFAULT_THRV,
    aggregation: SimilarityAggregation = SimilarityAggregation.MIN_PAIRS
) -> SchedulePolicy:
    """
    Parse "contextwise", "step1", "stepk:K" or "exp:B".

    Args:
        text: Policy spelling
        lam: Context-wise intensity
        thrv: Validation threshold
        aggregation: Context-wise similarity reduction

    Returns:
        SchedulePolicy
    """
    name, _, arg = text.strip().lower().partition(":")
    try:
        kind = ScheduleKind(name)
    except ValueError:
        raise ValueError(
            f"Unknown schedule {text!r}; expected contextwise, step1, stepk:K or exp:B"
        ) from None

    if kind in (ScheduleKind.STEP_K, ScheduleKind.EXPONENTIAL):
        if not arg:
            raise ValueError(f"Schedule {name!r} needs an integer argument, e.g. {name}:5")
        try:
            value = int(arg)
        except ValueError:
            raise ValueError(f"Schedule argument must be an integer, got {arg!r}") from None
        if kind == ScheduleKind.STEP_K:
            return SchedulePolicy(kind, lam, thrv, aggregation, step=value)
        return SchedulePolicy(kind, lam, thrv, aggregation, base=value)

    if arg:
        raise ValueError(f"Schedule {name!r} takes no argument")
    return SchedulePolicy(kind, lam, thrv, aggregation)


def build_schedule(policy: SchedulePolicy) -> ValidationSchedule:
    """Instantiate the schedule a policy describes."""
    if policy.kind == ScheduleKind.CONTEXT_WISE:
        return ContextWiseSchedule(policy.lam, policy.thrv, policy.aggregation)
    if policy.kind == ScheduleKind.STEP1:
        return StrideSchedule(1)
    if policy.kind == ScheduleKind.STEP_K:
        return StrideSchedule(policy.step)
    if policy.kind == ScheduleKind.EXPONENTIAL:
        return ExponentialSchedule(policy.base)
    raise NotImplementedError(f"Schedule {policy.kind} not implemented")


def first_validation_step(policy: SchedulePolicy) -> int:
    """Step of the first validation under ``policy``."""
    return build_schedule(policy).first_step

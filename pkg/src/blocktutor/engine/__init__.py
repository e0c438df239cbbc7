"""Constraint knowledge base and evaluation engine."""
from .evaluate import EvalContext, check_constraint, evaluate, kb_stats
from .kb import (
    ATTR_PRED_OPS,
    PREDICATE_TYPES,
    AttrPred,
    Constraint,
    FeedbackTemplates,
    KnowledgeBase,
    NodeMatcher,
    Pred,
    RelevancePattern,
    RuleCategory,
    Violation,
)
from .loader import (
    ADAPTED_TIERS,
    DuplicateRuleId,
    RuleParseError,
    UnboundBindingInCs,
    UnknownCategory,
    load_knowledge_base,
)

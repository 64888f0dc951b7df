"""Dependency-to-CCG treebank conversion toolkit.

Converts dependency treebanks (CoNLL-U) into CCG derivation banks
(AUTO format) with a trainable tree-encoder scorer, A* decoding under
optional span/category constraints, and predicate-argument based
evaluation of the result.
"""

from .categories import (Atomic, Category, FeatureSubstitution, Functor,
                         parse_category, print_category, strip_features,
                         unify_features)
from .decoder import (Constraint, ParseResult, apply_terminal_constraints,
                      astar_parse, check_constraint, convert, heuristic,
                      load_constraint_file, strip_dummies)
from .errors import (AlignmentError, AutoParseError, BudgetError,
                     CategoryParseError, CheckpointError, ConlluError,
                     ConstraintError, D2ccError, DataError, ExtractionError,
                     NoParseError, TrainingError, VocabularyError)
from .grammar import (Grammar, RuleKind, apply_binary, apply_unary,
                      default_grammar, load_grammar_config)
from .pas import (Metrics, PASDep, evaluate, extract_deps, index_lexicon,
                  load_coindex_table, write_pas_dump)
from .scores import ScoreMatrices, check_normalized, read_score_file, write_score_file
from .trees import (Binary, CCGTree, DepTree, Terminal, Unary,
                    extract_headfirst, read_auto, read_conllu,
                    read_json_trees, terminals, validate_tree, write_auto,
                    write_conllu, write_json_trees)

__version__ = "0.1.0"

"""Word-stimulus generalization lab: synthesize manipulated word images,
train CTC/attention transcription models from scratch, and map where they
break."""

try:
    from . import _strlab as _core  # installed wheel layout
except ImportError:  # pragma: no cover - in-tree builds put _strlab on sys.path
    import _strlab as _core

_NAMES = [
    "Model",
    "StrlabError",
    "WordList",
    "add_flankers",
    "build_model",
    "char_accuracy",
    "ctc_collapse",
    "ctc_greedy_decode",
    "ctc_loss",
    "edit_distance_accuracy",
    "font_ids",
    "length_accuracy",
    "length_subsets",
    "levenshtein",
    "load_wordlist",
    "occlude",
    "render_word",
    "resize",
    "salt_pepper",
    "stratified_split",
    "synthetic_wordlist",
    "train_on_words",
    "word_accuracy",
]

for _name in _NAMES:
    globals()[_name] = getattr(_core, _name)

__all__ = list(_NAMES)

from .studies import STUDIES, StudySpec, Sweep, load_config, run_study

__all__ = ["STUDIES", "StudySpec", "Sweep", "load_config", "run_study", "emit_plots"]


def emit_plots(*args, **kwargs):
    from .plots import emit_plots as _emit

    return _emit(*args, **kwargs)

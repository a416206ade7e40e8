from .config import RunConfig, load_config
from .runner import main, run

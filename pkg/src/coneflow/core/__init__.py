from .config import Configs, configs, load_config, merge_settings
from .errors import *
from .globals import global_vars, inc_global, next_run_id
from .io import dump_csv, dump_file, dump_plot_data, dump_summary, load_csv, load_file

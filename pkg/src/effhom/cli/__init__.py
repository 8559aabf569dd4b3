"""Command-line front end and binary-image ingestion."""

from .images import (ImageGrid, ParseError, build_cubical, geometric_vf, load_image, parse_image, parse_pbm,
                     parse_text_grid)
from .main import build_parser, main, parse_chain, parse_matrix, reduce_image

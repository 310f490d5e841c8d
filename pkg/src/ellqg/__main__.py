"""python -m ellqg"""

import sys

from .cli import main

sys.exit(main())

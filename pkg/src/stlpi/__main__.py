import sys

from stlpi.cli import main

sys.exit(main())

import sys

from plmmcv.cli import main

sys.exit(main())

import sys

from neuroqcd.cli import main

sys.exit(main())

import sys

from mmafdm.cli import main

sys.exit(main())

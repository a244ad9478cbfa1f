import sys

from mdsrel.cli import main

sys.exit(main())

import sys

from readtrack.cli import main

sys.exit(main())

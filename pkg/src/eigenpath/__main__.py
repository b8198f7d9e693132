import sys

from eigenpath.cli import main

sys.exit(main())

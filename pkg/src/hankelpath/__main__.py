import sys

from hankelpath.cli import main

sys.exit(main())

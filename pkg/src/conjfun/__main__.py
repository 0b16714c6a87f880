import sys

from conjfun.cli import main

sys.exit(main())

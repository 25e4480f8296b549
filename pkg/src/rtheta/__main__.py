import sys

from rtheta.cli import main

sys.exit(main())

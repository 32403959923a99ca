import sys

from lvreg.cli import main

sys.exit(main())

import sys

from hybridgrip.cli import main

sys.exit(main())

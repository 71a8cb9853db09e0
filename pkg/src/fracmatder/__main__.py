import sys

from fracmatder.cli import main

sys.exit(main())

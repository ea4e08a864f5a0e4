import sys

from fairrank.cli import main

sys.exit(main())

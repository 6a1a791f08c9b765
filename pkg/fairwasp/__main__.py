import sys

from fairwasp.main import main

sys.exit(main())

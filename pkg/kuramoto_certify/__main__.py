import sys

from kuramoto_certify.main import main

sys.exit(main())

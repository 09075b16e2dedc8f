from bitxsim.cli import main
import sys
sys.exit(main())

#!/usr/bin/env python3

####################################################################################
#                                                                                  #
#    ██████╗ ███████╗████████╗   ███████╗██╗    ██╗██╗███████╗████████╗██╗   ██╗   #
#   ██╔════╝ ██╔════╝╚══██╔══╝   ██╔════╝██║    ██║██║██╔════╝╚══██╔══╝╚██╗ ██╔╝   #
#   ██║  ███╗█████╗     ██║      ███████╗██║ █╗ ██║██║█████╗     ██║    ╚████╔╝    #
#   ██║   ██║██╔══╝     ██║      ╚════██║██║███╗██║██║██╔══╝     ██║     ╚██╔╝     #
#   ╚██████╔╝███████╗   ██║      ███████║╚███╔███╔╝██║██╗        ██║      ██║      #
#    ╚═════╝ ╚══════╝   ╚═╝      ╚══════╝ ╚══╝╚══╝ ╚═╝╚═╝        ╚═╝      ╚═╝      #
#                                                                                  #
####################################################################################
#
# Script Name: backdoor-tool.py
#
# Author: sanchez314c@speedheathens.com
#
# Date Created: 2026-10-17
#
# Last Modified: 2026-10-17
#
# Version: 1.0.0
#
# Description: Command-line front end for backdoorkit. Recognizes base
#              classes, detects weak / strong / deletion backdoor sets,
#              solves and counts through them, builds minimum-leaf backdoor
#              trees and writes benchmark formulas.
#
# Usage: python backdoor-tool.py <command> [options] INPUT.cnf
#        python backdoor-tool.py detect --kind strong --class horn -k 3 f.cnf
#        python backdoor-tool.py generate tree-family -n 4 --output fam4.cnf
#
# Dependencies: networkx, tqdm
#
# GitHub: https://github.com/sanchez314c
#
# Notes: Reports are JSON on stdout, diagnostics on stderr. Exit codes are
#        0 success, 1 negative answer, 2 input error, 3 budget exceeded.
#        Use --jobs 0 to check reducts on every CPU core.
#
####################################################################################

"""
Backdoor Tool
=============

Command-line entry point; see ``backdoorkit.cli`` for the subcommands.
"""

import sys

from backdoorkit.cli import main

if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\nOperation cancelled by user", file=sys.stderr)
        sys.exit(130)

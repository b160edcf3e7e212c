"""Runs an SMT-LIB script from standard input with the cvc5 Python API.

Lets the interpolation client use cvc5 where no cvc5 binary is
installed: adt-reduce interpolate --interp-cmd "python3 python/cvc5_shim.py".
"""

import sys

import cvc5
from cvc5 import InputLanguage, InputParser, SymbolManager


def main() -> int:
    text = sys.stdin.read()
    tm = cvc5.TermManager()
    solver = cvc5.Solver(tm)
    sm = SymbolManager(tm)
    parser = InputParser(solver, sm)
    parser.setStringInput(InputLanguage.SMT_LIB_2_6, text, "stdin")
    while True:
        cmd = parser.nextCommand()
        if cmd.isNull():
            break
        sys.stdout.write(cmd.invoke(solver, sm))
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())

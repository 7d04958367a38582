"""
Verification package for mce.

Special functions (erfc, incomplete gamma), the individual inequality and
identity checks, and run_suite, which assembles them into a
VerificationReport. Import from the submodules directly.
"""

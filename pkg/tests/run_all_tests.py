#!/usr/bin/env python3
"""
Run the fpm test suite using pytest

This script runs pytest over the tests directory, with the option to skip the
slow Paillier-backed tests or the loopback TCP tests, or to run only the slow
ones.
"""

import argparse
import os
import subprocess
import sys


def run_tests(test_files, verbose=True, markers=None):
    """Run pytest on specific files using the current Python interpreter"""
    cmd = [sys.executable, "-m", "pytest"]

    if verbose:
        cmd.append("-xvs")

    if markers:
        cmd.append(f"-m={markers}")

    cmd.extend(test_files)

    print(f"\n{'=' * 60}")
    print(f"Running tests: {' '.join(test_files)} {f'[{markers}]' if markers else ''}")
    print(f"{'=' * 60}\n")

    result = subprocess.run(cmd)
    return result.returncode == 0


def main():
    """Run fpm tests"""
    parser = argparse.ArgumentParser(description="Run fpm tests using pytest")
    parser.add_argument("--fast", action="store_true", help="Skip slow and TCP tests")
    parser.add_argument("--slow-only", action="store_true", help="Only run the slow Paillier tests")
    parser.add_argument("--no-tcp", action="store_true", help="Skip tests that open loopback sockets")
    parser.add_argument("-v", "--verbose", action="store_true", help="Show verbose output")
    args = parser.parse_args()

    # Run from the repository root so the root conftest is picked up
    script_dir = os.path.dirname(os.path.abspath(__file__))
    os.chdir(os.path.dirname(script_dir))

    if args.slow_only:
        print("\n🐢 Running Slow Tests")
        markers = "slow"
    elif args.fast:
        print("\n⚡ Running Fast Tests")
        markers = "not slow and not tcp"
    elif args.no_tcp:
        print("\n📋 Running All Tests Except TCP")
        markers = "not tcp"
    else:
        print("\n📋 Running All Tests")
        print("Note: slow tests generate a 1024-bit Paillier key; use --fast to skip them")
        markers = None
    print("-" * 60)

    success = run_tests(["tests"], args.verbose, markers)

    # Print summary
    print("\n📊 Test Summary")
    print("-" * 60)
    if success:
        print("✅ All tests passed successfully!")
    else:
        print("❌ Some tests failed. Check the logs above for details.")

    return 0 if success else 1


if __name__ == "__main__":
    sys.exit(main())

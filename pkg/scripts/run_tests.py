# scripts/run_tests.py
"""
Test runner for the LIWC bias audit toolkit.

    python scripts/run_tests.py                 # unit tests
    python scripts/run_tests.py --all           # unit tests plus the end-to-end pipeline
    python scripts/run_tests.py test_stats test_report
"""
import argparse
import sys
import unittest
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

TESTS_DIR = Path(__file__).parent.parent / 'tests'
SLOW_MODULES = {'test_pipeline'}


def discover_modules():
    return sorted(p.stem for p in TESTS_DIR.glob('test_*.py'))


def build_suite(module_names):
    loader = unittest.TestLoader()
    suite = unittest.TestSuite()
    for name in module_names:
        try:
            module = __import__(f'tests.{name}', fromlist=[''])
        except ImportError as e:
            print(f"❌ Test module '{name}' could not be imported: {e}")
            return None
        suite.addTests(loader.loadTestsFromModule(module))
    return suite


def main():
    parser = argparse.ArgumentParser(description='Run the toolkit test suite')
    parser.add_argument('modules', nargs='*', help='Test modules to run, e.g. test_stats')
    parser.add_argument('--all', action='store_true', help='Include end-to-end pipeline tests')
    parser.add_argument('-q', '--quiet', action='store_true', help='Less verbose output')
    args = parser.parse_args()

    modules = args.modules or [
        m for m in discover_modules() if args.all or m not in SLOW_MODULES
    ]
    print(f"🧪 Running {len(modules)} test module(s): {', '.join(modules)}")
    print("=" * 50)

    suite = build_suite(modules)
    if suite is None:
        return 1
    result = unittest.TextTestRunner(verbosity=1 if args.quiet else 2).run(suite)

    print("\n" + "=" * 50)
    if result.wasSuccessful():
        print(f"✅ {result.testsRun} tests passed")
        return 0
    print(f"❌ Failures: {len(result.failures)}, errors: {len(result.errors)}")
    return 1


if __name__ == "__main__":
    sys.exit(main())

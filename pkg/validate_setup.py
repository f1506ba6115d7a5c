#!/usr/bin/env python3
"""
Setup validation script for archsearch-mip

This script validates that the package is installed, laid out correctly and that the
graph-space encoding builds and certifies on a small size.
"""

import os
import sys


def check_dependencies():
    """Check if all required dependencies are installed."""
    print("🔍 Checking dependencies...")

    required_modules = [
        "pydantic",
        "typer",
        "rich",
        "filelock",
        "pandas",
        "numpy",
        "scipy",
    ]

    missing_modules = []

    for module in required_modules:
        try:
            __import__(module)
            print(f"  ✅ {module}")
        except ImportError:
            print(f"  ❌ {module}")
            missing_modules.append(module)

    if missing_modules:
        print(f"\n❌ Missing dependencies: {', '.join(missing_modules)}")
        return False

    print("\n✅ All dependencies are installed!")
    return True


def check_package_structure():
    """Check that the package structure is correct."""
    print("\n🏗️  Checking package structure...")

    required_files = [
        "archsearch_mip/__init__.py",
        "archsearch_mip/cli.py",
        "archsearch_mip/config.py",
        "archsearch_mip/exceptions.py",
        "archsearch_mip/log.py",
        "archsearch_mip/graphs/graph.py",
        "archsearch_mip/graphs/space.py",
        "archsearch_mip/kernels/graph_kernels.py",
        "archsearch_mip/kernels/features.py",
        "archsearch_mip/gp/gaussian_process.py",
        "archsearch_mip/mip/encoding.py",
        "archsearch_mip/mip/writers.py",
        "archsearch_mip/optimize/enumerative.py",
        "archsearch_mip/optimize/external.py",
        "archsearch_mip/harness/bo_loop.py",
        "archsearch.toml",
        "main.py",
        "README.md",
    ]

    missing_files = []

    for file_path in required_files:
        if os.path.exists(file_path):
            print(f"  ✅ {file_path}")
        else:
            print(f"  ❌ {file_path}")
            missing_files.append(file_path)

    if missing_files:
        print(f"\n❌ Missing files: {', '.join(missing_files)}")
        return False

    print("\n✅ Package structure is complete!")
    return True


def check_encoding():
    """Build the n=3 model, compare its census with the closed forms and certify n <= 2."""
    print("\n🧮 Checking the graph-space encoding...")

    try:
        from archsearch_mip.graphs.space import digraphs
        from archsearch_mip.mip.encoding import build_graph_space, expected_census
        from archsearch_mip.mip.verification import verify_encoding

        model = build_graph_space(digraphs(3))
        print(f"  ✅ n=3 model: {model.num_variables} variables, {model.num_constraints} constraints")
        if model.census() != expected_census(3):
            print(f"  ❌ Census mismatch: {model.census()}")
            return False
        print("  ✅ Constraint census matches")

        report = verify_encoding(n_max=2)
        if not report.ok:
            print("  ❌ Bijection certificate failed for n <= 2")
            return False
        print("  ✅ Bijection certified for n <= 2")

        print("\n✅ Encoding is valid!")
        return True

    except Exception as e:
        print(f"\n❌ Error with the encoding: {e}")
        return False


def check_configuration():
    """Check the project configuration file."""
    print("\n⚙️  Checking configuration...")

    try:
        from archsearch_mip.config import load_config

        config = load_config("archsearch.toml") if os.path.exists("archsearch.toml") else load_config()
        print(f"  ✅ run: {config.run.iters} iterations, init {config.run.init}, batch {config.run.batch}, beta_sqrt {config.run.beta_sqrt}")
        print(f"  ✅ solver time limit: {config.run.solver.time_limit:g}s")
        if config.run.solver.resolved_command():
            print("  ✅ External solver command configured")
        else:
            print("  ⚠️  No external solver command (ARCHSEARCH_SOLVER_CMD); the enumerative optimizer still works")

        print("\n✅ Configuration check complete!")
        return True

    except Exception as e:
        print(f"\n❌ Error with configuration: {e}")
        return False


def check_cli():
    """Check that the CLI can be imported and has correct structure."""
    print("\n💻 Checking CLI...")

    try:
        from archsearch_mip.cli import app

        print("  ✅ CLI module imported successfully")

        commands = [command.name or command.callback.__name__ for command in app.registered_commands if command.callback]
        expected_commands = [
            "verify-encoding",
            "kernel-compare",
            "run-bo",
            "random-search",
            "emit-mip",
            "check-solution",
            "synth-bench",
            "validate",
        ]

        missing = [cmd for cmd in expected_commands if cmd not in commands]
        for cmd in expected_commands:
            print(f"  {'❌' if cmd in missing else '✅'} CLI command '{cmd}'")
        if missing:
            return False

        print("\n✅ CLI check complete!")
        return True

    except Exception as e:
        print(f"\n❌ Error with CLI: {e}")
        return False


def main():
    """Run all validation checks."""
    print("🚀 archsearch-mip Setup Validation")
    print("=" * 50)

    checks = [
        check_dependencies,
        check_package_structure,
        check_encoding,
        check_configuration,
        check_cli,
    ]

    results = []

    for check in checks:
        try:
            result = check()
            results.append(result)
        except Exception as e:
            print(f"\n❌ Check failed with exception: {e}")
            results.append(False)

    print("\n" + "=" * 50)
    print("📊 Validation Summary:")
    print("=" * 50)

    passed_checks = sum(results)
    total_checks = len(results)

    for check, result in zip(checks, results):
        status = "✅ PASS" if result else "❌ FAIL"
        print(f"{status} {check.__name__}")

    print(f"\nOverall: {passed_checks}/{total_checks} checks passed")

    if passed_checks == total_checks:
        print("\n🎉 All checks passed.")
        return 0
    else:
        print(f"\n⚠️  {total_checks - passed_checks} checks failed. Please fix the issues above.")
        return 1


if __name__ == "__main__":
    sys.exit(main())

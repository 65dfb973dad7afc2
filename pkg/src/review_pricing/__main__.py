#!/usr/bin/env python3
"""
Main entry point for running Review Pricing as a module.

Example usage:
    python -m review_pricing solve-series --p 0.6 --q 0.4 --c 0.43 --delta 0.99
"""

from review_pricing.cli import main

if __name__ == '__main__':
    main()

"""Test package for fpm."""

"""Test suite for the unramified-points analysis package."""

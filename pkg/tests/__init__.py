"""Backoffice Test Suite."""

"""Test suite for OverPassAPI project."""
"""Built-in system families"""

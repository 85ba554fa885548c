from hypothesis import settings

settings.register_profile("osculum", deadline=None, print_blob=True)
settings.load_profile("osculum")

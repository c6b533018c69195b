from django.urls import path

from . import views

urlpatterns = [
    path('results/', views.ResultListView.as_view(), name='results'),
    path('model/', views.ModelTableView.as_view(), name='model_table'),
]
